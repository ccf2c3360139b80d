#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ptycho/fft.hpp"
#include "ptycho/gradcheck.hpp"
#include "ptycho/optics.hpp"
#include "test_util.hpp"

using namespace ptycho;
using namespace ptycho::ad;
using ptycho::testing::random_tensor;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexTensor gaussian_field(int n, double waist_px, double dx) {
  ComplexTensor f(n, n);
  const double c = (n - 1) / 2.0;
  for (int r = 0; r < n; ++r) {
    for (int col = 0; col < n; ++col) {
      const double x = (col - c) * dx, y = (r - c) * dx;
      f.re(r, col) = std::exp(-(x * x + y * y) / (waist_px * dx * waist_px * dx));
    }
  }
  return f;
}

/// 1/e^2 intensity radius from the second moment of |field|^2 (w = 2 sigma
/// for a Gaussian beam).
double beam_waist(const ComplexTensor& field, double dx) {
  const double c_row = (field.rows() - 1) / 2.0;
  const double c_col = (field.cols() - 1) / 2.0;
  double total = 0.0, m2 = 0.0;
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      const double inten = field.re(r, c) * field.re(r, c) +
                           field.im(r, c) * field.im(r, c);
      const double x = (c - c_col) * dx;
      total += inten;
      m2 += inten * x * x;
    }
  }
  return 2.0 * std::sqrt(m2 / total);
}

}  // namespace

TEST_CASE("transfer function: DC bin carries exp(jkz)") {
  PropagationSpec spec;
  spec.wavelength = 1e-9;
  spec.distance = 0.1;
  spec.dx = spec.dy = 2e-7;
  const ComplexTensor h = propagation_filter(16, 16, spec);
  const double kz = 2.0 * kPi / spec.wavelength * spec.distance;
  CHECK(std::abs(h.at(0, 0) - std::polar(1.0, kz)) < 1e-9);
  CHECK(std::abs(std::abs(h.at(0, 0)) - 1.0) < 1e-12);
}

TEST_CASE("transfer function: zero distance is the identity") {
  PropagationSpec spec;
  spec.wavelength = 2.0;
  spec.distance = 0.0;
  spec.dx = spec.dy = 0.5;
  const ComplexTensor h = propagation_filter(8, 8, spec);
  CHECK(h.max_abs_diff(ComplexTensor::constant(8, 8, 1.0)) == 0.0);
}

TEST_CASE("transfer function: unit modulus on the band, zero beyond") {
  PropagationSpec spec;
  spec.wavelength = 2.0;  // lambda/(2 dx) = 2: evanescent corners exist
  spec.distance = 7.0;
  spec.dx = spec.dy = 0.5;
  const ComplexTensor h = propagation_filter(16, 16, spec);
  int prop = 0, evan = 0;
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      const double fx = fft_freq(c, 16, spec.dx);
      const double fy = fft_freq(r, 16, spec.dy);
      const double arg = 1.0 - spec.wavelength * spec.wavelength * (fx * fx + fy * fy);
      const double mag = std::abs(h.at(r, c));
      if (arg >= 0.0) {
        CHECK(std::abs(mag - 1.0) < 1e-12);
        ++prop;
      } else {
        CHECK(mag == 0.0);
        ++evan;
      }
    }
  }
  CHECK(prop > 0);
  CHECK(evan > 0);
}

TEST_CASE("transfer function symmetry H(f) = H(-f)") {
  PropagationSpec spec;
  spec.wavelength = 1.5;
  spec.distance = 3.2;
  spec.dx = spec.dy = 0.7;
  const int n = 12;
  const ComplexTensor h = propagation_filter(n, n, spec);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int rm = (n - r) % n, cm = (n - c) % n;
      CHECK(std::abs(h.at(r, c) - h.at(rm, cm)) < 1e-14);
    }
  }
}

TEST_CASE("plane wave is an eigenfunction with phase kz") {
  PropagationSpec spec;
  spec.wavelength = 0.05;
  spec.distance = 40.0;
  spec.dx = spec.dy = 1.0;
  spec.pad = PadPolicy::fixed_pad(0);
  Variable field = Variable::constant(ComplexTensor::constant(16, 16, 1.0));
  const ComplexTensor out = propagate(field, spec).value();
  const std::complex<double> expected =
      std::polar(1.0, 2.0 * kPi / spec.wavelength * spec.distance);
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      CHECK(std::abs(out.at(r, c) - expected) < 1e-10);
    }
  }
}

TEST_CASE("propagating forward then back restores the field") {
  Rng rng(5);
  PropagationSpec spec;
  spec.wavelength = 0.1;  // lambda/(2 dx) = 0.1: the whole grid propagates
  spec.dx = spec.dy = 0.5;
  spec.pad = PadPolicy::fixed_pad(0);
  const ComplexTensor x = random_tensor(rng, 24, 24);
  spec.distance = 33.0;
  Variable fwd = propagate(Variable::constant(x), spec);
  spec.distance = -33.0;
  const ComplexTensor back = propagate(fwd, spec).value();
  CHECK(back.max_abs_diff(x) < 1e-10);
}

TEST_CASE("energy conservation without evanescent content") {
  Rng rng(6);
  PropagationSpec spec;
  spec.wavelength = 0.1;
  spec.dx = spec.dy = 0.5;
  spec.distance = 21.7;
  spec.pad = PadPolicy::fixed_pad(0);
  const ComplexTensor x = random_tensor(rng, 20, 26);
  const ComplexTensor out = propagate(Variable::constant(x), spec).value();
  CHECK(std::abs(out.squared_norm() - x.squared_norm()) / x.squared_norm() <
        1e-10);
}

TEST_CASE("group property under shared padding") {
  Rng rng(7);
  PropagationSpec spec;
  spec.wavelength = 0.05;
  spec.dx = spec.dy = 1.0;
  spec.pad = PadPolicy::fixed_pad(0);
  const ComplexTensor x = random_tensor(rng, 16, 16);
  spec.distance = 120.0;
  const ComplexTensor direct = propagate(Variable::constant(x), spec).value();
  spec.distance = 70.0;
  Variable half = propagate(Variable::constant(x), spec);
  spec.distance = 50.0;
  const ComplexTensor composed = propagate(half, spec).value();
  CHECK(composed.max_abs_diff(direct) < 1e-10);
}

TEST_CASE("Gaussian beam expansion matches the paraxial formula") {
  const int n = 64;
  const double dx = 1.0, w0 = 8.0, lambda = 0.05;
  PropagationSpec spec;
  spec.wavelength = lambda;
  spec.dx = spec.dy = dx;
  spec.distance = 2000.0;
  const double rayleigh = kPi * w0 * w0 / lambda;
  const double expected =
      w0 * std::sqrt(1.0 + spec.distance * spec.distance / (rayleigh * rayleigh));

  const ComplexTensor out =
      propagate(Variable::constant(gaussian_field(n, w0, dx)), spec).value();
  const double measured = beam_waist(out, dx);
  CHECK(std::abs(measured - expected) / expected < 0.02);
}

TEST_CASE("auto padding follows the propagation cone") {
  CHECK(auto_pad_size(128, 1e-9, 0.0, 2e-7) == 0);
  // ceil(1e-9 * 0.1 / (2 * (2e-7)^2)) = 1250, clamped by the 4x rule.
  CHECK(auto_pad_size(128, 1e-9, 0.1, 2e-7) == 512);
  CHECK(auto_pad_size(2048, 1e-9, 0.1, 2e-7) == 1250);
  int prev = 0;
  for (double z = 0.0; z < 0.4; z += 0.01) {
    const int pad = auto_pad_size(64, 1e-9, z, 1e-6);
    CHECK(pad >= prev);
    prev = pad;
  }
}

TEST_CASE("Fresnel rescaling limits") {
  ExperimentGeometry geom;
  geom.detector_pixel = 2e-5;
  geom.sample_to_detector = 0.7;
  geom.source_to_sample = 1e12;  // collimated limit
  FresnelScaling s = fresnel_rescale(geom);
  CHECK(s.magnification == doctest::Approx(1.0));
  CHECK(s.effective_distance == doctest::Approx(0.7));

  geom.source_to_sample = 0.7;  // symmetric geometry
  s = fresnel_rescale(geom);
  CHECK(s.magnification == doctest::Approx(2.0));
  CHECK(s.effective_distance == doctest::Approx(0.35));
  CHECK(s.effective_pixel == doctest::Approx(1e-5));
}

TEST_CASE("point-source pattern equals the rescaled parallel-beam pattern") {
  // Divergent beam: Gaussian with the point-source quadratic phase, full
  // propagation distance. Parallel equivalent: same Gaussian, effective
  // distance z2/M, observed on a grid finer by 1/M.
  const int n = 128;
  const double dx = 1.0, w0 = 6.0, lambda = 0.05;
  const double z1 = 3000.0, z2 = 3000.0;
  const double mag = (z1 + z2) / z1;  // 2
  const double z_eff = z2 / mag;

  ComplexTensor src = gaussian_field(n, w0, dx);
  ComplexTensor divergent = src;
  const double k = 2.0 * kPi / lambda;
  const double c = (n - 1) / 2.0;
  for (int r = 0; r < n; ++r) {
    for (int col = 0; col < n; ++col) {
      const double x = (col - c) * dx, y = (r - c) * dx;
      const double phase = k * (x * x + y * y) / (2.0 * z1);
      divergent.set(r, col, divergent.at(r, col) * std::polar(1.0, phase));
    }
  }

  PropagationSpec spec;
  spec.wavelength = lambda;
  spec.dx = spec.dy = dx;
  spec.distance = z2;
  const ComplexTensor i_div = ad::modulus_squared(
      propagate(Variable::constant(divergent), spec).value());

  PropagationSpec fine = spec;
  fine.dx = fine.dy = dx / mag;
  fine.distance = z_eff;
  const ComplexTensor i_par = ad::modulus_squared(
      propagate(Variable::constant(gaussian_field(n, w0 * mag, dx / mag)), fine)
          .value());

  // Compare I_div(x) against I_par(x/M)/M^2 over the central region.
  double num = 0.0, den = 0.0;
  const int half = n / 4;
  for (int r = -half; r < half; ++r) {
    for (int col = -half; col < half; ++col) {
      const int rc = static_cast<int>(c) + r, cc = static_cast<int>(c) + col;
      const double a = i_div.re(rc, cc);
      const double b = i_par.re(rc, cc) / (mag * mag);
      num += (a - b) * (a - b);
      den += b * b;
    }
  }
  CHECK(std::sqrt(num / den) < 0.01);
}

TEST_CASE("intensity gradient w.r.t. z matches finite differences") {
  Rng rng(9);
  ComplexTensor field = random_tensor(rng, 12, 12);
  PropagationSpec spec;
  spec.wavelength = 0.05;
  spec.dx = spec.dy = 1.0;
  spec.pad = PadPolicy::fixed_pad(6);

  std::vector<CheckPoint> pts{{ComplexTensor::scalar(35.0), true},
                              {field, false}};
  const double err = finite_difference_check(
      [&](Tape&, const std::vector<Variable>& v) {
        Variable out = propagate(v[1], v[0], spec);
        return sum(modulus_squared(crop_center(out, 6, 6)));
      },
      pts, 1e-5);
  CHECK(err < 1e-5);
}

TEST_CASE("material model round trips") {
  const int n = 12;
  Rng rng(10);
  MaterialMap m;
  m.delta = ptycho::testing::random_real_tensor(rng, n, n, 1e-5, 3e-5);
  m.beta = ptycho::testing::random_real_tensor(rng, n, n, 1e-6, 5e-6);
  m.thickness = ptycho::testing::random_real_tensor(rng, n, n, 0.0, 2e-6);
  const double lambda = 1e-9;

  SUBCASE("zero thickness gives unit transmission") {
    MaterialMap vac = m;
    vac.thickness = ComplexTensor(n, n);
    const ComplexTensor o = transmission_from_material(vac, lambda);
    CHECK(o.max_abs_diff(ComplexTensor::constant(n, n, 1.0)) < 1e-14);
  }
  SUBCASE("no absorption gives a pure phase object") {
    MaterialMap phase_only = m;
    phase_only.beta = ComplexTensor(n, n);
    const ComplexTensor o = transmission_from_material(phase_only, lambda);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        CHECK(std::abs(std::abs(o.at(r, c)) - 1.0) < 1e-12);
      }
    }
  }
  SUBCASE("thickness recovery inverts the model") {
    const ComplexTensor o = transmission_from_material(m, lambda);
    const ThicknessResult t =
        thickness_from_reconstruction(o, m.delta, m.beta, lambda);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        CHECK(t.valid_phase.re(r, c) == 1.0);
        CHECK(t.valid_magnitude.re(r, c) == 1.0);
        CHECK(std::abs(t.from_phase.re(r, c) - m.thickness.re(r, c)) < 1e-10);
        CHECK(std::abs(t.from_magnitude.re(r, c) - m.thickness.re(r, c)) < 1e-10);
      }
    }
  }
  SUBCASE("zero material constants are flagged invalid") {
    MaterialMap zero = m;
    zero.delta = ComplexTensor(n, n);
    zero.beta = ComplexTensor(n, n);
    const ComplexTensor o = transmission_from_material(zero, lambda);
    const ThicknessResult t =
        thickness_from_reconstruction(o, zero.delta, zero.beta, lambda);
    CHECK(t.valid_phase.squared_norm() == 0.0);
    CHECK(t.valid_magnitude.squared_norm() == 0.0);
  }
}

TEST_CASE("material model rejects negative beta or thickness") {
  MaterialMap m;
  m.delta = ComplexTensor(2, 2);
  m.beta = ComplexTensor(2, 2);
  m.thickness = ComplexTensor(2, 2);
  m.beta.re(0, 0) = -1.0;
  CHECK_THROWS_AS(transmission_from_material(m, 1e-9), std::invalid_argument);
}
