#include "ptycho/forward_model.hpp"

#include <cmath>
#include <stdexcept>

namespace ptycho {

CropPlan shot_crop_plan(const ScanSet& scan, std::size_t j, int obj_rows,
                        int obj_cols, int pat_rows, int pat_cols) {
  if (j >= scan.count()) {
    throw std::out_of_range("shot_crop_plan: shot index out of range");
  }
  const double px = scan.nominal_m[j][0] / scan.pixel_pitch;
  const double py = scan.nominal_m[j][1] / scan.pixel_pitch;
  CropPlan plan;
  plan.out_rows = pat_rows;
  plan.out_cols = pat_cols;
  plan.sx = obj_cols > 1 ? double(pat_cols - 1) / (obj_cols - 1) : 1.0;
  plan.sy = obj_rows > 1 ? double(pat_rows - 1) / (obj_rows - 1) : 1.0;
  plan.base_tx = obj_cols > 1 ? 2.0 * px / (obj_cols - 1) : 0.0;
  plan.base_ty = obj_rows > 1 ? 2.0 * py / (obj_rows - 1) : 0.0;
  return plan;
}

int required_object_size(const ScanSet& scan, int pattern_px, int margin_px) {
  double max_abs = 0.0;
  for (const auto& pos : scan.nominal_m) {
    max_abs = std::max(max_abs, std::abs(pos[0] / scan.pixel_pitch));
    max_abs = std::max(max_abs, std::abs(pos[1] / scan.pixel_pitch));
  }
  const int half = static_cast<int>(std::ceil(max_abs + (pattern_px - 1) / 2.0));
  return 2 * (half + margin_px) + 1;
}

Variable exit_wave(const Variable& probe, const Variable& object_crop) {
  if (!probe.value().same_shape(object_crop.value())) {
    throw std::invalid_argument("exit_wave: probe and crop shapes differ");
  }
  return ad::mul(probe, object_crop);
}

Variable simulate_intensity(const std::vector<Variable>& probe_modes,
                            const Variable& object, const Variable& tx,
                            const Variable& ty, const CropPlan& plan,
                            const PropagationSpec& spec,
                            const Variable* distance_m, SimDiagnostics* diag) {
  if (probe_modes.empty()) {
    throw std::invalid_argument("simulate_intensity: need at least one mode");
  }
  if (diag) {
    AffineParams p{plan.sx, plan.sy, plan.base_tx + tx.value().re(0, 0),
                   plan.base_ty + ty.value().re(0, 0)};
    diag->out_of_bounds_pixels += count_out_of_bounds(
        generate_grid(p, plan.out_rows, plan.out_cols), object.value().rows(),
        object.value().cols());
  }
  Variable crop = bilinear_crop(object, tx, ty, plan);
  Variable total;
  for (const Variable& mode : probe_modes) {
    Variable field = distance_m
                         ? propagate(exit_wave(mode, crop), *distance_m, spec)
                         : propagate(exit_wave(mode, crop), spec);
    Variable intensity = ad::modulus_squared(field);
    total = total.defined() ? ad::add(total, intensity) : intensity;
  }
  return total;
}

std::vector<ComplexTensor> simulate_batch(
    const std::vector<ComplexTensor>& probe_modes, const ComplexTensor& object,
    const ScanSet& scan, const std::vector<int>& indices,
    const PropagationSpec& spec, SimDiagnostics* diag) {
  std::vector<Variable> modes;
  modes.reserve(probe_modes.size());
  for (const ComplexTensor& m : probe_modes) {
    modes.push_back(Variable::constant(m));
  }
  const Variable obj = Variable::constant(object);
  const int pat_rows = probe_modes[0].rows(), pat_cols = probe_modes[0].cols();

  std::vector<ComplexTensor> out;
  out.reserve(indices.size());
  for (int j : indices) {
    if (j < 0 || static_cast<std::size_t>(j) >= scan.count()) {
      throw std::out_of_range("simulate_batch: shot index out of range");
    }
    const CropPlan plan = shot_crop_plan(scan, j, object.rows(), object.cols(),
                                         pat_rows, pat_cols);
    const Variable tx = Variable::constant(
        ComplexTensor::scalar(scan.corrections[j][0]), /*real_only=*/true);
    const Variable ty = Variable::constant(
        ComplexTensor::scalar(scan.corrections[j][1]), /*real_only=*/true);
    out.push_back(
        simulate_intensity(modes, obj, tx, ty, plan, spec, nullptr, diag)
            .value());
  }
  return out;
}

}  // namespace ptycho
