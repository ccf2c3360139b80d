#pragma once

#include <functional>
#include <vector>

#include "ptycho/tape.hpp"

namespace ptycho::ad {

/// One point a gradient check perturbs: value plus the real-constrained flag
/// (real points only have their real plane probed).
struct CheckPoint {
  ComplexTensor value;
  bool real_only = false;
};

/// Scalar loss built from fresh leaves on a fresh tape each evaluation.
using ScalarFn =
    std::function<Variable(Tape&, const std::vector<Variable>&)>;

/// Central-difference check of a scalar function's tape gradients.
/// Returns max over coordinates of |analytic - numeric| divided by
/// max(|analytic|, |numeric|, 1e-12). Throws on non-finite loss values.
double finite_difference_check(const ScalarFn& f,
                               const std::vector<CheckPoint>& points,
                               double eps = 1e-6);

}  // namespace ptycho::ad
