#pragma once

#include <array>
#include <vector>

#include "ptycho/optics.hpp"
#include "ptycho/spatial.hpp"

namespace ptycho {

/// Scan geometry: nominal positions in meters (x right, y down, relative to
/// the object center) plus the learnable per-shot corrections in normalized
/// translation units. Corrections start at zero.
struct ScanSet {
  std::vector<std::array<double, 2>> nominal_m;
  std::vector<std::array<double, 2>> corrections;
  double pixel_pitch = 1e-6;

  std::size_t count() const { return nominal_m.size(); }
};

struct SimDiagnostics {
  int out_of_bounds_pixels = 0;
};

/// Normalized crop geometry for shot j of a scan against an object of the
/// given size, per t = 2*pos_px/(D-1) with align-corners sampling.
CropPlan shot_crop_plan(const ScanSet& scan, std::size_t j, int obj_rows,
                        int obj_cols, int pat_rows, int pat_cols);

/// Smallest square object edge containing every nominal window plus margin.
int required_object_size(const ScanSet& scan, int pattern_px, int margin_px);

/// Exit wave leaving the sample: elementwise probe * object crop.
Variable exit_wave(const Variable& probe, const Variable& object_crop);

/// One simulated diffraction intensity: sum over mutually incoherent probe
/// modes of |propagate(P_p * crop(O))|^2. Differentiable w.r.t. the object,
/// each mode, the corrections and (when given) the propagation distance.
Variable simulate_intensity(const std::vector<Variable>& probe_modes,
                            const Variable& object, const Variable& tx,
                            const Variable& ty, const CropPlan& plan,
                            const PropagationSpec& spec,
                            const Variable* distance_m = nullptr,
                            SimDiagnostics* diag = nullptr);

/// Plain batched evaluation at the scan's current corrections (no gradients);
/// order-preserving over `indices`.
std::vector<ComplexTensor> simulate_batch(
    const std::vector<ComplexTensor>& probe_modes, const ComplexTensor& object,
    const ScanSet& scan, const std::vector<int>& indices,
    const PropagationSpec& spec, SimDiagnostics* diag = nullptr);

}  // namespace ptycho
