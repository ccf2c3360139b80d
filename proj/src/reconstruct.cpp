#include "ptycho/reconstruct.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ptycho/io_util.hpp"

namespace ptycho {

namespace {

using ad::Tape;

struct ParamSnapshot {
  ComplexTensor object;
  std::vector<ComplexTensor> probe_modes;
  double z_scale_u;
  std::vector<std::array<double, 2>> corrections;
};

ParamSnapshot snapshot(const ReconstructionState& s) {
  return {s.object, s.probe_modes, s.z_scale_u, s.scan.corrections};
}

void restore(ReconstructionState& s, const ParamSnapshot& snap) {
  s.object = snap.object;
  s.probe_modes = snap.probe_modes;
  s.z_scale_u = snap.z_scale_u;
  s.scan.corrections = snap.corrections;
}

double probe_energy_target(const PtychoDataset& ds) {
  double best = 0.0;
  for (const ComplexTensor& f : ds.frames) {
    double e = 0.0;
    for (double v : f.re()) e += std::max(v, 0.0);
    best = std::max(best, e);
  }
  return best;
}

void update_group(OptimMethod method, AdamState& adam, ComplexTensor& x,
                  const ComplexTensor& grad, double lr) {
  if (method == OptimMethod::kAdam) {
    AdamConfig cfg;
    cfg.lr = lr;
    adam_step(adam, x, grad, cfg);
  } else {
    gd_step(x, grad, lr);
  }
}

/// Overlapping crops of recon/truth objects over the truth-frame ROI,
/// assuming both frames share a center.
std::pair<ComplexTensor, ComplexTensor> crop_common(const ComplexTensor& recon,
                                                    const ComplexTensor& truth,
                                                    const EvalRoi& roi) {
  const int dr = (recon.rows() - truth.rows()) / 2;
  const int dc = (recon.cols() - truth.cols()) / 2;
  int r0 = std::max({roi.row0, 0, -dr});
  int c0 = std::max({roi.col0, 0, -dc});
  int r1 = std::min({roi.row0 + roi.rows, truth.rows(), recon.rows() - dr});
  int c1 = std::min({roi.col0 + roi.cols, truth.cols(), recon.cols() - dc});
  if (r1 <= r0 || c1 <= c0) {
    throw std::invalid_argument("evaluation roi does not overlap both objects");
  }
  const EvalRoi truth_roi{r0, c0, r1 - r0, c1 - c0};
  const EvalRoi recon_roi{r0 + dr, c0 + dc, r1 - r0, c1 - c0};
  return {crop_roi(recon, recon_roi), crop_roi(truth, truth_roi)};
}

}  // namespace

std::vector<std::array<double, 2>> positions_px(
    const std::vector<std::array<double, 2>>& positions_m, double pitch,
    int obj_rows, int obj_cols) {
  std::vector<std::array<double, 2>> out;
  out.reserve(positions_m.size());
  const double cx = (obj_cols - 1) / 2.0, cy = (obj_rows - 1) / 2.0;
  for (const auto& p : positions_m) {
    out.push_back({cx + p[0] / pitch, cy + p[1] / pitch});
  }
  return out;
}

std::vector<std::array<double, 2>> estimated_positions_px(
    const ReconstructionState& state) {
  const int rows = state.object.rows(), cols = state.object.cols();
  auto out = positions_px(state.scan.nominal_m, state.scan.pixel_pitch, rows,
                          cols);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j][0] += state.scan.corrections[j][0] * (cols - 1) / 2.0;
    out[j][1] += state.scan.corrections[j][1] * (rows - 1) / 2.0;
  }
  return out;
}

ReconstructionState init_state(const PtychoDataset& ds,
                               const ReconstructOptions& opt) {
  if (ds.count() == 0) throw std::invalid_argument("init_state: empty dataset");
  ReconstructionState state;
  state.scan.nominal_m = ds.positions_m;
  state.scan.corrections.assign(ds.count(), {0.0, 0.0});
  state.scan.pixel_pitch = ds.dx;

  const int margin =
      opt.object_margin_px >= 0 ? opt.object_margin_px : ds.rows / 2;
  const int d = required_object_size(state.scan, ds.rows, margin);
  state.object = ComplexTensor::constant(d, d, 1.0);

  const double radius = opt.probe_init_radius_px > 0.0
                            ? opt.probe_init_radius_px
                            : ds.rows / 3.0;
  const double energy = probe_energy_target(ds);
  const double amp = std::sqrt(
      energy / (std::numbers::pi * radius * radius * opt.probe_modes));
  const double cr = (ds.rows - 1) / 2.0, cc = (ds.cols - 1) / 2.0;
  for (int m = 0; m < opt.probe_modes; ++m) {
    ComplexTensor mode(ds.rows, ds.cols);
    for (int r = 0; r < ds.rows; ++r) {
      for (int c = 0; c < ds.cols; ++c) {
        if (std::hypot(r - cr, c - cc) <= radius) {
          // Higher modes get distinct phase ramps so joint optimization can
          // tell them apart from the first step.
          const double ramp =
              m == 0 ? 0.0 : 2.0 * std::numbers::pi * m * c / ds.cols;
          mode.set(r, c, std::polar(amp, ramp));
        }
      }
    }
    state.probe_modes.push_back(std::move(mode));
  }

  state.z_reference_m = ds.z_init;
  state.z_scale_u = 0.0;
  state.adam_probe.resize(opt.probe_modes);
  state.adam_positions.resize(ds.count());
  return state;
}

ReconstructionState reconstruct(const PtychoDataset& ds,
                                const ReconstructOptions& opt,
                                ReconstructionState state,
                                const GroundTruth* truth,
                                const EpochCallback& on_epoch) {
  const int j_total = static_cast<int>(ds.count());
  if (j_total == 0) throw std::invalid_argument("reconstruct: empty dataset");
  if (!opt.object.enabled && !opt.probe.enabled && !opt.distance.enabled &&
      !opt.positions.enabled) {
    throw std::invalid_argument("reconstruct: no parameter group enabled");
  }
  const double energy_target = probe_energy_target(ds);
  const int pat_rows = ds.rows, pat_cols = ds.cols;
  const int obj_rows = state.object.rows(), obj_cols = state.object.cols();

  ParamSnapshot last_finite = snapshot(state);
  const int first_epoch = state.epochs_done;
  for (int epoch = first_epoch; epoch < first_epoch + opt.epochs; ++epoch) {
    double epoch_fid = 0.0, epoch_reg = 0.0;
    const auto batches =
        batch_iterator(j_total, std::min(opt.batch_size, j_total), opt.seed,
                       epoch);
    for (const std::vector<int>& batch : batches) {
      Tape tape;
      Variable object = opt.object.enabled
                            ? tape.leaf(state.object)
                            : Variable::constant(state.object);
      std::vector<Variable> modes;
      for (const ComplexTensor& m : state.probe_modes) {
        modes.push_back(opt.probe.enabled ? tape.leaf(m)
                                          : Variable::constant(m));
      }

      PropagationSpec spec;
      spec.wavelength = ds.wavelength;
      spec.dx = ds.dx;
      spec.dy = ds.dy;
      spec.distance = state.z_m();

      Variable u, z_var;
      if (opt.distance.enabled) {
        u = tape.leaf(ComplexTensor::scalar(state.z_scale_u),
                      /*real_only=*/true);
        z_var = ad::add_scalar(ad::scale(u, state.z_reference_m),
                               state.z_reference_m);
      }

      std::vector<Variable> sims;
      std::vector<const ComplexTensor*> measured;
      std::vector<Variable> tx_vars(batch.size()), ty_vars(batch.size());
      std::vector<Variable> correction_vars;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        const int j = batch[k];
        const auto& corr = state.scan.corrections[j];
        if (opt.positions.enabled) {
          tx_vars[k] = tape.leaf(ComplexTensor::scalar(corr[0]), true);
          ty_vars[k] = tape.leaf(ComplexTensor::scalar(corr[1]), true);
          correction_vars.push_back(tx_vars[k]);
          correction_vars.push_back(ty_vars[k]);
        } else {
          tx_vars[k] = Variable::constant(ComplexTensor::scalar(corr[0]), true);
          ty_vars[k] = Variable::constant(ComplexTensor::scalar(corr[1]), true);
        }
        const CropPlan plan =
            shot_crop_plan(state.scan, j, obj_rows, obj_cols, pat_rows,
                           pat_cols);
        sims.push_back(simulate_intensity(
            modes, object, tx_vars[k], ty_vars[k], plan, spec,
            opt.distance.enabled ? &z_var : nullptr));
        measured.push_back(&ds.frames[j]);
      }

      Variable fid = data_fidelity(sims, measured, opt.loss_domain);
      RegBreakdown reg_parts;
      Variable reg = regularization(object, modes, correction_vars, opt.reg,
                                    energy_target, &reg_parts);
      Variable loss = ad::add(fid, reg);

      const double fid_v = fid.value().re(0, 0);
      const double reg_v = reg.value().re(0, 0);
      if (!std::isfinite(fid_v + reg_v)) {
        log_info("reconstruct: loss diverged at epoch " +
                 std::to_string(epoch) + "; keeping last finite state");
        restore(state, last_finite);
        return state;
      }
      epoch_fid += fid_v;
      epoch_reg += reg_v;
      last_finite = snapshot(state);

      tape.backward(loss);

      if (opt.object.enabled && object.grad()) {
        update_group(opt.method, state.adam_object, state.object,
                     *object.grad(), opt.object.lr);
      }
      if (opt.probe.enabled) {
        for (std::size_t m = 0; m < modes.size(); ++m) {
          if (modes[m].grad()) {
            update_group(opt.method, state.adam_probe[m], state.probe_modes[m],
                         *modes[m].grad(), opt.probe.lr);
          }
        }
      }
      if (opt.distance.enabled && u.grad()) {
        ComplexTensor uv = ComplexTensor::scalar(state.z_scale_u);
        update_group(opt.method, state.adam_distance, uv, *u.grad(),
                     opt.distance.lr);
        state.z_scale_u = uv.re(0, 0);
      }
      if (opt.positions.enabled) {
        for (std::size_t k = 0; k < batch.size(); ++k) {
          const int j = batch[k];
          ComplexTensor x(1, 2);
          x.re(0, 0) = state.scan.corrections[j][0];
          x.re(0, 1) = state.scan.corrections[j][1];
          ComplexTensor g(1, 2);
          g.re(0, 0) = tx_vars[k].grad_or_zero().re(0, 0);
          g.re(0, 1) = ty_vars[k].grad_or_zero().re(0, 0);
          update_group(opt.method, state.adam_positions[j], x, g,
                       opt.positions.lr);
          state.scan.corrections[j] = {x.re(0, 0), x.re(0, 1)};
        }
      }
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.data_fidelity = epoch_fid;
    rec.regularization = epoch_reg;
    rec.total_loss = epoch_fid + epoch_reg;
    rec.z_m = state.z_m();
    if (truth) {
      const auto est = estimated_positions_px(state);
      const auto tru = positions_px(truth->positions_m, state.scan.pixel_pitch,
                                    obj_rows, obj_cols);
      const PositionErrorStats stats = position_error_stats(est, tru);
      rec.pos_err_median = stats.median;
      rec.pos_err_mean = stats.mean;
      rec.pos_err_max = stats.max;
      auto [rec_crop, truth_crop] =
          crop_common(state.object, truth->object, truth->roi);
      const ComplexTensor aligned = remove_ambiguities(rec_crop, truth_crop);
      rec.ssim_magnitude =
          ssim(magnitude_plane(aligned), magnitude_plane(truth_crop));
      rec.ssim_phase = ssim(phase_plane(aligned), phase_plane(truth_crop));
      rec.has_truth_metrics = true;
    }
    state.history.epochs.push_back(rec);
    state.epochs_done = epoch + 1;
    if (on_epoch) on_epoch(state, epoch + 1);
  }
  return state;
}

ReconstructionState reconstruct(const PtychoDataset& ds,
                                const ReconstructOptions& opt,
                                const GroundTruth* truth,
                                const EpochCallback& on_epoch) {
  return reconstruct(ds, opt, init_state(ds, opt), truth, on_epoch);
}

}  // namespace ptycho
