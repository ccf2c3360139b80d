#include "ptycho/optics.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "ptycho/fft.hpp"

namespace ptycho {

namespace {

using ad::fft_freq;

void validate(const PropagationSpec& spec) {
  if (spec.wavelength <= 0.0 || spec.dx <= 0.0 || spec.dy <= 0.0) {
    throw std::invalid_argument("PropagationSpec: wavelength and pitch must be > 0");
  }
}

/// z-independent parts of the transfer function: kappa = k*sqrt(1-(lambda f)^2)
/// on the propagating band and the 0/1 band mask. Cached per grid.
struct FilterBasis {
  ComplexTensor kappa;  // real plane, rad/m
  ComplexTensor mask;   // real plane in {0,1}
};

std::shared_ptr<const FilterBasis> filter_basis(int rows, int cols,
                                                double wavelength, double dx,
                                                double dy) {
  using Key = std::tuple<int, int, double, double, double>;
  static std::map<Key, std::shared_ptr<const FilterBasis>> cache;
  static std::mutex mutex;

  const Key key{rows, cols, wavelength, dx, dy};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  auto basis = std::make_shared<FilterBasis>();
  basis->kappa = ComplexTensor(rows, cols);
  basis->mask = ComplexTensor(rows, cols);
  const double k = 2.0 * std::numbers::pi / wavelength;
  for (int r = 0; r < rows; ++r) {
    const double fy = fft_freq(r, rows, dy);
    const double ly2 = wavelength * fy * wavelength * fy;
    for (int c = 0; c < cols; ++c) {
      const double fx = fft_freq(c, cols, dx);
      const double arg = 1.0 - wavelength * fx * wavelength * fx - ly2;
      if (arg >= 0.0) {
        basis->kappa.re(r, c) = k * std::sqrt(arg);
        basis->mask.re(r, c) = 1.0;
      }
    }
  }
  cache.emplace(key, basis);
  return basis;
}

struct PadAmount {
  int rows = 0, cols = 0;
};

PadAmount pad_for(const PropagationSpec& spec, double distance, int rows,
                  int cols) {
  if (spec.pad.mode == PadMode::kFixed) {
    return {spec.pad.fixed, spec.pad.fixed};
  }
  return {auto_pad_size(rows, spec.wavelength, distance, spec.dy),
          auto_pad_size(cols, spec.wavelength, distance, spec.dx)};
}

}  // namespace

int auto_pad_size(int axis_len, double wavelength, double distance,
                  double pitch) {
  if (distance == 0.0) return 0;
  const double spread = wavelength * std::abs(distance) / (2.0 * pitch * pitch);
  // Nudge below the ceil so rounding noise cannot bump an exact integer up.
  const int n = static_cast<int>(std::ceil(spread * (1.0 - 1e-12)));
  return std::min(n, 4 * axis_len);
}

ComplexTensor propagation_filter(int rows, int cols,
                                 const PropagationSpec& spec) {
  validate(spec);
  if (spec.distance == 0.0) {
    return ComplexTensor::constant(rows, cols, 1.0);
  }
  const auto basis = filter_basis(rows, cols, spec.wavelength, spec.dx, spec.dy);
  ComplexTensor h(rows, cols);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (basis->mask.re()[i] != 0.0) {
      const double phase = spec.distance * basis->kappa.re()[i];
      h.re()[i] = std::cos(phase);
      h.im()[i] = std::sin(phase);
    }
  }
  return h;
}

Variable propagate(const Variable& field, const PropagationSpec& spec) {
  validate(spec);
  const int rows = field.value().rows(), cols = field.value().cols();
  const PadAmount pad = pad_for(spec, spec.distance, rows, cols);
  Variable padded = ad::pad_center(field, pad.rows, pad.cols);
  const ComplexTensor h =
      propagation_filter(padded.value().rows(), padded.value().cols(), spec);
  Variable spectrum = ad::mul_plane(ad::fft2(padded), h);
  return ad::crop_center(ad::ifft2(spectrum), rows, cols);
}

Variable propagate(const Variable& field, const Variable& distance_m,
                   const PropagationSpec& spec) {
  validate(spec);
  if (!distance_m.value().is_scalar() || !distance_m.real_only()) {
    throw std::invalid_argument("propagate: distance must be a real 1x1 scalar");
  }
  const int rows = field.value().rows(), cols = field.value().cols();
  const double z_now = distance_m.value().re(0, 0);
  const PadAmount pad = pad_for(spec, z_now, rows, cols);
  Variable padded = ad::pad_center(field, pad.rows, pad.cols);
  const auto basis = filter_basis(padded.value().rows(), padded.value().cols(),
                                  spec.wavelength, spec.dx, spec.dy);
  Variable theta = ad::scalar_times_plane(distance_m, basis->kappa);
  Variable h = ad::mul_plane(ad::exp_imag(theta), basis->mask);
  Variable spectrum = ad::mul(ad::fft2(padded), h);
  return ad::crop_center(ad::ifft2(spectrum), rows, cols);
}

FresnelScaling fresnel_rescale(const ExperimentGeometry& geom) {
  if (geom.source_to_sample <= 0.0 || geom.sample_to_detector <= 0.0) {
    throw std::invalid_argument("fresnel_rescale: distances must be > 0");
  }
  FresnelScaling out;
  out.magnification =
      (geom.source_to_sample + geom.sample_to_detector) / geom.source_to_sample;
  out.effective_distance = geom.sample_to_detector / out.magnification;
  out.effective_pixel = geom.detector_pixel / out.magnification;
  return out;
}

ComplexTensor transmission_from_material(const MaterialMap& m,
                                         double wavelength) {
  if (!m.delta.same_shape(m.beta) || !m.delta.same_shape(m.thickness)) {
    throw std::invalid_argument("transmission_from_material: plane shape mismatch");
  }
  for (std::size_t i = 0; i < m.beta.size(); ++i) {
    if (m.beta.re()[i] < 0.0 || m.thickness.re()[i] < 0.0) {
      throw std::invalid_argument(
          "transmission_from_material: beta and thickness must be >= 0");
    }
  }
  const double c = 2.0 * std::numbers::pi / wavelength;
  ComplexTensor out(m.delta.rows(), m.delta.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = m.thickness.re()[i];
    const double mag = std::exp(-c * m.beta.re()[i] * t);
    const double phase = -c * m.delta.re()[i] * t;
    out.re()[i] = mag * std::cos(phase);
    out.im()[i] = mag * std::sin(phase);
  }
  return out;
}

ThicknessResult thickness_from_reconstruction(const ComplexTensor& transmission,
                                              const ComplexTensor& delta,
                                              const ComplexTensor& beta,
                                              double wavelength) {
  if (!transmission.same_shape(delta) || !transmission.same_shape(beta)) {
    throw std::invalid_argument("thickness_from_reconstruction: shape mismatch");
  }
  const double c = 2.0 * std::numbers::pi / wavelength;
  const int rows = transmission.rows(), cols = transmission.cols();
  ThicknessResult out{ComplexTensor(rows, cols), ComplexTensor(rows, cols),
                      ComplexTensor(rows, cols), ComplexTensor(rows, cols)};
  for (int r = 0; r < rows; ++r) {
    for (int c2 = 0; c2 < cols; ++c2) {
      const std::complex<double> o = transmission.at(r, c2);
      const double d = delta.re(r, c2), b = beta.re(r, c2);
      if (d != 0.0) {
        out.from_phase.re(r, c2) = -std::arg(o) / (c * d);
        out.valid_phase.re(r, c2) = 1.0;
      }
      const double mag = std::abs(o);
      if (b != 0.0 && mag > 0.0) {
        out.from_magnitude.re(r, c2) = -std::log(mag) / (c * b);
        out.valid_magnitude.re(r, c2) = 1.0;
      }
    }
  }
  return out;
}

}  // namespace ptycho
