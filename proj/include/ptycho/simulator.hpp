#pragma once

#include <cstdint>

#include "ptycho/dataset.hpp"
#include "ptycho/forward_model.hpp"

namespace ptycho {

struct SimulationRecipe {
  int pattern_px = 64;
  int grid_n = 7;
  double step_px = 12.0;        // scan step
  double jitter_std_px = 1.0;   // known jitter baked into the true grid
  double wavelength = 1e-9;
  double z_true = 0.1;
  double pixel_pitch = 1e-6;
  std::uint64_t seed = 1;
  int probe_modes = 1;
  double probe_radius_px = 20.0;  // circular support of the true probe
  double object_mag_low = 0.6;    // magnitude image mapped to [low, 1]
  double object_phase_span = 1.0; // radians, centered on zero
  int object_margin_px = -1;      // <0: half the pattern size

  enum class Noise { kNone, kPoisson } noise = Noise::kNone;
  double poisson_flux = 1e4;      // expected photons per unit intensity

  // Manifest corruption applied by the simulate tool before writing: the
  // reconstruction starts from these wrong values while the sidecar keeps
  // the actual ones.
  double z_error_frac = 0.0;
  double position_error_std_px = 0.0;
};

struct SyntheticData {
  PtychoDataset dataset;  // true geometry in the manifest
  GroundTruth truth;
};

/// n x n grid of scan positions (meters, centered on zero) at the given step,
/// plus i.i.d. Gaussian jitter of jitter_std pixels per coordinate.
ScanSet make_scan_grid(int n, double step_px, double jitter_std_px,
                       double pixel_pitch, std::uint64_t seed);

/// Linear overlap between adjacent illuminated regions, clamped to [0, 1].
double overlap_factor(double step_px, double probe_diameter_px);

/// Runs the forward model at the true parameters over the whole scan grid.
SyntheticData synthesize_dataset(const SimulationRecipe& recipe);

/// What reconstruction has to undo: the distance estimate corrupted by the
/// fractional error and every position perturbed by Gaussian jitter.
PtychoDataset corrupt_parameters(const PtychoDataset& ds_true,
                                 double z_error_frac,
                                 double position_error_std_px,
                                 std::uint64_t seed);

}  // namespace ptycho
