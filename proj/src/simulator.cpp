#include "ptycho/simulator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ptycho/rng.hpp"
#include "ptycho/test_images.hpp"

namespace ptycho {

namespace {

double smooth_disk(double dist, double radius, double edge) {
  const double t = std::clamp((radius - dist) / edge, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

/// Rectangle of object pixels covered by at least one scan window.
EvalRoi coverage_roi(const std::vector<std::array<double, 2>>& positions_m,
                     double pitch, int obj_rows, int obj_cols, int pattern_px) {
  const double cx = (obj_cols - 1) / 2.0, cy = (obj_rows - 1) / 2.0;
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const auto& p : positions_m) {
    const double px = cx + p[0] / pitch, py = cy + p[1] / pitch;
    min_x = std::min(min_x, px);
    max_x = std::max(max_x, px);
    min_y = std::min(min_y, py);
    max_y = std::max(max_y, py);
  }
  const double half = (pattern_px - 1) / 2.0;
  EvalRoi roi;
  roi.row0 = std::max(0, static_cast<int>(std::ceil(min_y - half)));
  roi.col0 = std::max(0, static_cast<int>(std::ceil(min_x - half)));
  const int row1 = std::min(obj_rows - 1, static_cast<int>(std::floor(max_y + half)));
  const int col1 = std::min(obj_cols - 1, static_cast<int>(std::floor(max_x + half)));
  roi.rows = row1 - roi.row0 + 1;
  roi.cols = col1 - roi.col0 + 1;
  return roi;
}

}  // namespace

ScanSet make_scan_grid(int n, double step_px, double jitter_std_px,
                       double pixel_pitch, std::uint64_t seed) {
  if (n < 2 || step_px <= 0.0) {
    throw std::invalid_argument("make_scan_grid: need n >= 2 and step > 0");
  }
  Rng rng = Rng::keyed(seed, 0x5ca21u);
  ScanSet scan;
  scan.pixel_pitch = pixel_pitch;
  const double origin = -step_px * (n - 1) / 2.0;
  for (int gy = 0; gy < n; ++gy) {
    for (int gx = 0; gx < n; ++gx) {
      const double x = origin + gx * step_px + jitter_std_px * rng.gaussian();
      const double y = origin + gy * step_px + jitter_std_px * rng.gaussian();
      scan.nominal_m.push_back({x * pixel_pitch, y * pixel_pitch});
      scan.corrections.push_back({0.0, 0.0});
    }
  }
  return scan;
}

double overlap_factor(double step_px, double probe_diameter_px) {
  if (probe_diameter_px <= 0.0) {
    throw std::invalid_argument("overlap_factor: probe diameter must be > 0");
  }
  return std::clamp(1.0 - step_px / probe_diameter_px, 0.0, 1.0);
}

SyntheticData synthesize_dataset(const SimulationRecipe& recipe) {
  if (recipe.pattern_px < 2 || recipe.probe_modes < 1) {
    throw std::invalid_argument("synthesize_dataset: bad recipe");
  }
  const int k = recipe.pattern_px;
  ScanSet scan = make_scan_grid(recipe.grid_n, recipe.step_px,
                                recipe.jitter_std_px, recipe.pixel_pitch,
                                recipe.seed);
  const int margin =
      recipe.object_margin_px >= 0 ? recipe.object_margin_px : k / 2;
  const int d = required_object_size(scan, k, margin);

  // Object: one chart as magnitude in [low, 1], another as centered phase.
  const ComplexTensor mag_img = test_image(TestImage::kDisks, d, d);
  const ComplexTensor phase_img = test_image(TestImage::kWaves, d, d);
  ComplexTensor object(d, d);
  for (std::size_t i = 0; i < object.size(); ++i) {
    const double mag = recipe.object_mag_low +
                       (1.0 - recipe.object_mag_low) * mag_img.re()[i];
    const double phase = recipe.object_phase_span * (phase_img.re()[i] - 0.5);
    object.re()[i] = mag * std::cos(phase);
    object.im()[i] = mag * std::sin(phase);
  }

  // Probe modes: textured magnitude and phase under a smooth circular
  // support. The reconstruction never sees this mask.
  const ComplexTensor pm = test_image(TestImage::kBlobs, k, k);
  const ComplexTensor pp = test_image(TestImage::kRings, k, k);
  std::vector<ComplexTensor> modes;
  const double cr = (k - 1) / 2.0;
  double energy_scale = 1.0;
  for (int m = 0; m < recipe.probe_modes; ++m) {
    ComplexTensor mode(k, k);
    const double weight = std::pow(0.55, m);
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) {
        const int cs = (c + 7 * m) % k;  // decorrelate higher modes
        const double support =
            smooth_disk(std::hypot(r - cr, c - cr), recipe.probe_radius_px, 2.0);
        const double amp = weight * support * (0.35 + 0.65 * pm.re(r, cs));
        const double phase = 1.6 * (pp.re(r, cs) - 0.5) * (m + 1);
        mode.set(r, c, std::polar(amp, phase));
      }
    }
    modes.push_back(std::move(mode));
  }
  // Normalize total energy to the pattern pixel count (arbitrary but stable).
  double total = 0.0;
  for (const ComplexTensor& m : modes) total += m.squared_norm();
  energy_scale = std::sqrt(static_cast<double>(k) * k / total);
  for (ComplexTensor& m : modes) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      m.re()[i] *= energy_scale;
      m.im()[i] *= energy_scale;
    }
  }

  PropagationSpec spec;
  spec.wavelength = recipe.wavelength;
  spec.distance = recipe.z_true;
  spec.dx = recipe.pixel_pitch;
  spec.dy = recipe.pixel_pitch;

  std::vector<int> indices(scan.count());
  for (std::size_t j = 0; j < scan.count(); ++j) indices[j] = static_cast<int>(j);
  std::vector<ComplexTensor> frames =
      simulate_batch(modes, object, scan, indices, spec);

  if (recipe.noise == SimulationRecipe::Noise::kPoisson) {
    for (std::size_t j = 0; j < frames.size(); ++j) {
      Rng rng = Rng::keyed(recipe.seed, 0x90155u, j);
      for (double& v : frames[j].re()) {
        v = rng.poisson(v * recipe.poisson_flux) / recipe.poisson_flux;
      }
    }
  }

  SyntheticData out;
  out.dataset.wavelength = recipe.wavelength;
  out.dataset.z_init = recipe.z_true;
  out.dataset.dx = recipe.pixel_pitch;
  out.dataset.dy = recipe.pixel_pitch;
  out.dataset.rows = k;
  out.dataset.cols = k;
  out.dataset.positions_m = scan.nominal_m;
  out.dataset.frames = std::move(frames);
  out.dataset.notes = "synthetic";

  out.truth.object = std::move(object);
  out.truth.probe_modes = std::move(modes);
  out.truth.z_m = recipe.z_true;
  out.truth.positions_m = scan.nominal_m;

  // Evaluation ROI: the rectangle the scan actually illuminated.
  out.truth.roi =
      coverage_roi(out.truth.positions_m, recipe.pixel_pitch, d, d, k);
  return out;
}

PtychoDataset corrupt_parameters(const PtychoDataset& ds_true,
                                 double z_error_frac,
                                 double position_error_std_px,
                                 std::uint64_t seed) {
  if (z_error_frac <= -1.0) {
    throw std::invalid_argument("corrupt_parameters: z error must be > -1");
  }
  PtychoDataset ds = ds_true;
  ds.z_init = ds_true.z_init * (1.0 + z_error_frac);
  Rng rng = Rng::keyed(seed, 0xc0442u);
  for (auto& p : ds.positions_m) {
    p[0] += position_error_std_px * ds.dx * rng.gaussian();
    p[1] += position_error_std_px * ds.dy * rng.gaussian();
  }
  return ds;
}

}  // namespace ptycho
