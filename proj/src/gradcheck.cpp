#include "ptycho/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace ptycho::ad {

namespace {

double eval_loss(const ScalarFn& f, const std::vector<CheckPoint>& points) {
  Tape tape;
  std::vector<Variable> vars;
  vars.reserve(points.size());
  for (const CheckPoint& p : points) {
    vars.push_back(tape.leaf(p.value, p.real_only));
  }
  const Variable loss = f(tape, vars);
  const double v = loss.value().re(0, 0);
  if (!std::isfinite(v)) {
    throw std::runtime_error("finite_difference_check: non-finite loss value");
  }
  return v;
}

}  // namespace

double finite_difference_check(const ScalarFn& f,
                               const std::vector<CheckPoint>& points,
                               double eps) {
  if (eps <= 0.0) {
    throw std::invalid_argument("finite_difference_check: eps must be > 0");
  }

  // Analytic gradients from one backward pass.
  Tape tape;
  std::vector<Variable> vars;
  for (const CheckPoint& p : points) {
    vars.push_back(tape.leaf(p.value, p.real_only));
  }
  tape.backward(f(tape, vars));
  std::vector<ComplexTensor> analytic;
  for (const Variable& v : vars) analytic.push_back(v.grad_or_zero());

  double max_err = 0.0;
  std::vector<CheckPoint> probe = points;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const int rows = points[k].value.rows(), cols = points[k].value.cols();
    const int planes = points[k].real_only ? 1 : 2;
    for (int plane = 0; plane < planes; ++plane) {
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
          auto coord = [&](CheckPoint& p) -> double& {
            return plane == 0 ? p.value.re(r, c) : p.value.im(r, c);
          };
          const double saved = coord(probe[k]);
          coord(probe[k]) = saved + eps;
          const double fp = eval_loss(f, probe);
          coord(probe[k]) = saved - eps;
          const double fm = eval_loss(f, probe);
          coord(probe[k]) = saved;

          const double numeric = (fp - fm) / (2.0 * eps);
          const double analytic_v = plane == 0 ? analytic[k].re(r, c)
                                               : analytic[k].im(r, c);
          const double denom =
              std::max({std::abs(analytic_v), std::abs(numeric), 1e-12});
          max_err = std::max(max_err, std::abs(analytic_v - numeric) / denom);
        }
      }
    }
  }
  return max_err;
}

}  // namespace ptycho::ad
