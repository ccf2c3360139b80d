#pragma once

#include "ptycho/tape.hpp"

namespace ptycho {

using ad::ComplexTensor;
using ad::Variable;

/// Scale is fixed (it selects the crop extent); only the translation column
/// is ever optimized.
struct AffineParams {
  double sx = 1.0, sy = 1.0;
  double tx = 0.0, ty = 0.0;
};

/// Normalized source coordinates per output pixel, row-major. [-1, 1] maps to
/// the full input extent with align-corners semantics (-1 is the center of
/// the first pixel, +1 the center of the last).
struct SamplingGrid {
  int rows = 0, cols = 0;
  std::vector<double> x, y;
};

/// Triangular kernel K1(t) = max(0, 1 - |t|).
double kernel_k1(double t);

SamplingGrid generate_grid(const AffineParams& p, int out_rows, int out_cols);

/// Samples U at the grid points; out-of-bounds taps contribute zero. The same
/// transform acts on the real and imaginary channels.
ComplexTensor bilinear_sample(const ComplexTensor& u, const SamplingGrid& grid);

/// Adjoint of bilinear_sample w.r.t. the pixel values: scatters g through the
/// transposed tap weights into a u_rows x u_cols tensor.
ComplexTensor bilinear_scatter(const ComplexTensor& g, const SamplingGrid& grid,
                               int u_rows, int u_cols);

/// Output pixels whose 2x2 tap neighborhood leaves the input entirely.
int count_out_of_bounds(const SamplingGrid& grid, int u_rows, int u_cols);

/// Crop geometry for the differentiable sampler: fixed scale plus a nominal
/// translation; the learnable correction is added on top.
struct CropPlan {
  int out_rows = 0, out_cols = 0;
  double sx = 1.0, sy = 1.0;
  double base_tx = 0.0, base_ty = 0.0;
};

/// Differentiable sub-pixel crop of `u`. Gradients flow to the object pixels
/// and to the normalized translation corrections (tx, ty), both real 1x1.
Variable bilinear_crop(const Variable& u, const Variable& tx,
                       const Variable& ty, const CropPlan& plan);

}  // namespace ptycho
