#pragma once

#include "ptycho/tape.hpp"

namespace ptycho {

using ad::ComplexTensor;
using ad::Variable;

enum class PadMode { kAuto, kFixed };

struct PadPolicy {
  PadMode mode = PadMode::kAuto;
  int fixed = 0;

  static PadPolicy automatic() { return {PadMode::kAuto, 0}; }
  static PadPolicy fixed_pad(int n) { return {PadMode::kFixed, n}; }
};

/// Free-space propagation geometry: wavelength and signed distance in meters,
/// sample pitch in meters per pixel.
struct PropagationSpec {
  double wavelength = 1e-9;
  double distance = 0.0;
  double dx = 1e-6;
  double dy = 1e-6;
  PadPolicy pad = PadPolicy::automatic();
};

struct ExperimentGeometry {
  double source_to_sample = 1.0;
  double sample_to_detector = 1.0;
  double detector_pixel = 1e-6;
  double numerical_aperture = 0.1;
};

struct FresnelScaling {
  double effective_distance = 0.0;
  double magnification = 1.0;
  double effective_pixel = 0.0;
};

/// Thin-object material description; all three planes are real-valued.
struct MaterialMap {
  ComplexTensor delta;      // refractive index decrement
  ComplexTensor beta;       // absorption index, >= 0
  ComplexTensor thickness;  // meters, >= 0
};

struct ThicknessResult {
  ComplexTensor from_phase;      // real plane, meters
  ComplexTensor from_magnitude;  // real plane, meters
  ComplexTensor valid_phase;     // 1 where the phase channel is defined
  ComplexTensor valid_magnitude;
};

/// Pixels of padding per side of one axis: the lateral spread of the
/// propagation cone ceil(lambda*|z| / (2*pitch^2)), clamped to 4x the axis
/// length. Zero distance needs no padding.
int auto_pad_size(int axis_len, double wavelength, double distance,
                  double pitch);

/// Plane-wave transfer function on the given (already padded) shape with DC
/// at bin (0,0). Evanescent bins are exactly zero; z == 0 gives the identity
/// filter.
ComplexTensor propagation_filter(int rows, int cols, const PropagationSpec& spec);

/// Angular-spectrum propagation over spec.distance. Differentiable w.r.t. the
/// field; the filter is a constant.
Variable propagate(const Variable& field, const PropagationSpec& spec);

/// Same, but with the distance as a live scalar (meters, real 1x1), so
/// gradients flow to z through the transfer function phase. The padding is
/// derived from the current value of z.
Variable propagate(const Variable& field, const Variable& distance_m,
                   const PropagationSpec& spec);

/// Point-source geometry mapped to an equivalent parallel-beam problem.
FresnelScaling fresnel_rescale(const ExperimentGeometry& geom);

/// O = exp(-(2*pi/lambda)*beta*t) * exp(-j*(2*pi/lambda)*delta*t).
ComplexTensor transmission_from_material(const MaterialMap& m, double wavelength);

/// Inverts the material model per channel; pixels whose material constant is
/// zero are flagged invalid. The phase channel assumes |arg O| < pi.
ThicknessResult thickness_from_reconstruction(const ComplexTensor& transmission,
                                              const ComplexTensor& delta,
                                              const ComplexTensor& beta,
                                              double wavelength);

}  // namespace ptycho
