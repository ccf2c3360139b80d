#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "ptycho/dataset.hpp"
#include "ptycho/forward_model.hpp"
#include "ptycho/loss.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/optim.hpp"

namespace ptycho {

enum class OptimMethod { kAdam, kGradientDescent };

struct GroupConfig {
  bool enabled = true;
  double lr = 1e-2;
};

struct ReconstructOptions {
  int epochs = 1000;
  int batch_size = 5;
  LossDomain loss_domain = LossDomain::kAmplitude;
  OptimMethod method = OptimMethod::kAdam;
  GroupConfig object{true, 1e-1};
  GroupConfig probe{true, 1e-1};
  GroupConfig distance{true, 1e-2};
  GroupConfig positions{true, 1e-2};
  RegWeights reg;
  std::uint64_t seed = 1;
  int probe_modes = 1;
  double probe_init_radius_px = 0.0;  // 0: a third of the pattern size
  int object_margin_px = -1;          // <0: half the pattern size
};

/// All latent quantities plus the optimizer state, persisted across steps.
struct ReconstructionState {
  ComplexTensor object;
  std::vector<ComplexTensor> probe_modes;
  double z_reference_m = 0.0;  // fixed reference, from the dataset manifest
  double z_scale_u = 0.0;      // learnable: z = z_reference * (1 + u)
  ScanSet scan;

  AdamState adam_object;
  std::vector<AdamState> adam_probe;
  AdamState adam_distance;
  std::vector<AdamState> adam_positions;  // one 1x2 state per shot

  int epochs_done = 0;
  ConvergenceHistory history;

  double z_m() const { return z_reference_m * (1.0 + z_scale_u); }
};

/// Fresh state for a dataset: unit object sized to cover the scan, disk
/// probe(s), distance from the manifest, zero corrections.
ReconstructionState init_state(const PtychoDataset& ds,
                               const ReconstructOptions& opt);

/// Epoch-end hook (checkpoints etc.); epoch is the 1-based count completed.
using EpochCallback =
    std::function<void(const ReconstructionState&, int epoch)>;

/// Joint reconstruction: epochs x ceil(J/batch) optimization steps over the
/// enabled parameter groups. Deterministic for a fixed seed. Aborts, keeping
/// the last finite state, if the loss stops being finite. When truth is
/// given, per-epoch SSIM and position-error metrics are recorded.
ReconstructionState reconstruct(const PtychoDataset& ds,
                                const ReconstructOptions& opt,
                                ReconstructionState state,
                                const GroundTruth* truth = nullptr,
                                const EpochCallback& on_epoch = nullptr);

/// Convenience: init + reconstruct.
ReconstructionState reconstruct(const PtychoDataset& ds,
                                const ReconstructOptions& opt,
                                const GroundTruth* truth = nullptr,
                                const EpochCallback& on_epoch = nullptr);

/// Estimated positions (nominal + corrections) in object pixels, the frame
/// position_error_stats expects.
std::vector<std::array<double, 2>> estimated_positions_px(
    const ReconstructionState& state);
std::vector<std::array<double, 2>> positions_px(
    const std::vector<std::array<double, 2>>& positions_m, double pitch,
    int obj_rows, int obj_cols);

}  // namespace ptycho
