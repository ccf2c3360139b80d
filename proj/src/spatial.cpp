#include "ptycho/spatial.hpp"

#include <cmath>
#include <stdexcept>

namespace ptycho {

namespace {

struct Taps {
  int r0, c0;
  double wr1, wc1;  // fractional parts; wr0 = 1 - wr1 etc.
  bool inside(int u_rows, int u_cols, int dr, int dc) const {
    const int r = r0 + dr, c = c0 + dc;
    return r >= 0 && r < u_rows && c >= 0 && c < u_cols;
  }
};

Taps taps_for(double x_norm, double y_norm, int u_rows, int u_cols) {
  const double col_f = (x_norm + 1.0) * 0.5 * (u_cols - 1);
  const double row_f = (y_norm + 1.0) * 0.5 * (u_rows - 1);
  Taps t;
  t.r0 = static_cast<int>(std::floor(row_f));
  t.c0 = static_cast<int>(std::floor(col_f));
  t.wr1 = row_f - t.r0;
  t.wc1 = col_f - t.c0;
  return t;
}

}  // namespace

double kernel_k1(double t) { return std::max(0.0, 1.0 - std::abs(t)); }

SamplingGrid generate_grid(const AffineParams& p, int out_rows, int out_cols) {
  if (out_rows <= 0 || out_cols <= 0) {
    throw std::invalid_argument("generate_grid: output shape must be positive");
  }
  SamplingGrid g;
  g.rows = out_rows;
  g.cols = out_cols;
  g.x.resize(static_cast<std::size_t>(out_rows) * out_cols);
  g.y.resize(g.x.size());
  for (int r = 0; r < out_rows; ++r) {
    const double yi = out_rows > 1 ? 2.0 * r / (out_rows - 1) - 1.0 : 0.0;
    for (int c = 0; c < out_cols; ++c) {
      const double xi = out_cols > 1 ? 2.0 * c / (out_cols - 1) - 1.0 : 0.0;
      const std::size_t i = static_cast<std::size_t>(r) * out_cols + c;
      g.x[i] = p.sx * xi + p.tx;
      g.y[i] = p.sy * yi + p.ty;
    }
  }
  return g;
}

ComplexTensor bilinear_sample(const ComplexTensor& u, const SamplingGrid& grid) {
  ComplexTensor out(grid.rows, grid.cols);
  const int ur = u.rows(), uc = u.cols();
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    const Taps t = taps_for(grid.x[i], grid.y[i], ur, uc);
    double vr = 0.0, vi = 0.0;
    for (int dr = 0; dr <= 1; ++dr) {
      for (int dc = 0; dc <= 1; ++dc) {
        if (!t.inside(ur, uc, dr, dc)) continue;
        const double w = (dr ? t.wr1 : 1.0 - t.wr1) * (dc ? t.wc1 : 1.0 - t.wc1);
        vr += w * u.re(t.r0 + dr, t.c0 + dc);
        vi += w * u.im(t.r0 + dr, t.c0 + dc);
      }
    }
    out.re()[i] = vr;
    out.im()[i] = vi;
  }
  return out;
}

ComplexTensor bilinear_scatter(const ComplexTensor& g, const SamplingGrid& grid,
                               int u_rows, int u_cols) {
  if (g.rows() != grid.rows || g.cols() != grid.cols) {
    throw std::invalid_argument("bilinear_scatter: grid and g shape mismatch");
  }
  ComplexTensor out(u_rows, u_cols);
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    const Taps t = taps_for(grid.x[i], grid.y[i], u_rows, u_cols);
    for (int dr = 0; dr <= 1; ++dr) {
      for (int dc = 0; dc <= 1; ++dc) {
        if (!t.inside(u_rows, u_cols, dr, dc)) continue;
        const double w = (dr ? t.wr1 : 1.0 - t.wr1) * (dc ? t.wc1 : 1.0 - t.wc1);
        out.re(t.r0 + dr, t.c0 + dc) += w * g.re()[i];
        out.im(t.r0 + dr, t.c0 + dc) += w * g.im()[i];
      }
    }
  }
  return out;
}

int count_out_of_bounds(const SamplingGrid& grid, int u_rows, int u_cols) {
  int n = 0;
  for (std::size_t i = 0; i < grid.x.size(); ++i) {
    const Taps t = taps_for(grid.x[i], grid.y[i], u_rows, u_cols);
    bool any = false;
    for (int dr = 0; dr <= 1 && !any; ++dr) {
      for (int dc = 0; dc <= 1 && !any; ++dc) {
        any = t.inside(u_rows, u_cols, dr, dc);
      }
    }
    if (!any) ++n;
  }
  return n;
}

Variable bilinear_crop(const Variable& u, const Variable& tx,
                       const Variable& ty, const CropPlan& plan) {
  if (!tx.value().is_scalar() || !ty.value().is_scalar() || !tx.real_only() ||
      !ty.real_only()) {
    throw std::invalid_argument("bilinear_crop: corrections must be real 1x1");
  }
  AffineParams params{plan.sx, plan.sy, plan.base_tx + tx.value().re(0, 0),
                      plan.base_ty + ty.value().re(0, 0)};
  auto grid = std::make_shared<const SamplingGrid>(
      generate_grid(params, plan.out_rows, plan.out_cols));
  ComplexTensor out = bilinear_sample(u.value(), *grid);

  std::vector<const Variable*> operands{&u, &tx, &ty};
  ad::Tape* tape = nullptr;
  for (const Variable* v : operands) {
    if (!v->requires_grad()) continue;
    if (tape && tape != v->tape()) {
      throw std::invalid_argument("bilinear_crop: operands on different tapes");
    }
    tape = v->tape();
  }
  if (!tape) return Variable::constant(std::move(out));

  const int iu = u.node(), itx = tx.node(), ity = ty.node();
  auto uv = u.value_ptr();
  const int ur = uv->rows(), uc = uv->cols();
  auto backward = [iu, itx, ity, uv, grid, ur, uc](ad::Tape& t,
                                                   const ComplexTensor& g) {
    if (iu >= 0) t.accumulate_adjoint(iu, bilinear_scatter(g, *grid, ur, uc));
    if (itx < 0 && ity < 0) return;
    // d(sample)/d(col_f) and /d(row_f) from the tap differences, chained with
    // d(col_f)/d(tx) = (uc-1)/2 in align-corners units.
    double acc_x = 0.0, acc_y = 0.0;
    for (std::size_t i = 0; i < grid->x.size(); ++i) {
      const Taps tp = taps_for(grid->x[i], grid->y[i], ur, uc);
      double dxr = 0.0, dxi = 0.0, dyr = 0.0, dyi = 0.0;
      for (int dr = 0; dr <= 1; ++dr) {
        for (int dc = 0; dc <= 1; ++dc) {
          if (!tp.inside(ur, uc, dr, dc)) continue;
          const double wr = dr ? tp.wr1 : 1.0 - tp.wr1;
          const double wc = dc ? tp.wc1 : 1.0 - tp.wc1;
          const double sr = dr ? 1.0 : -1.0;  // d(wr)/d(row_f)
          const double sc = dc ? 1.0 : -1.0;  // d(wc)/d(col_f)
          const double ure = uv->re(tp.r0 + dr, tp.c0 + dc);
          const double uim = uv->im(tp.r0 + dr, tp.c0 + dc);
          dxr += wr * sc * ure;
          dxi += wr * sc * uim;
          dyr += sr * wc * ure;
          dyi += sr * wc * uim;
        }
      }
      acc_x += g.re()[i] * dxr + g.im()[i] * dxi;
      acc_y += g.re()[i] * dyr + g.im()[i] * dyi;
    }
    if (itx >= 0) {
      t.accumulate_adjoint(itx,
                           ComplexTensor::scalar(acc_x * 0.5 * (uc - 1)));
    }
    if (ity >= 0) {
      t.accumulate_adjoint(ity,
                           ComplexTensor::scalar(acc_y * 0.5 * (ur - 1)));
    }
  };
  auto out_ptr = std::make_shared<const ComplexTensor>(std::move(out));
  const int id = tape->push_node(out_ptr, false, std::move(backward));
  return tape->wrap(id, out_ptr, false);
}

}  // namespace ptycho
