#pragma once

#include <cstdint>
#include <vector>

#include "ptycho/tensor.hpp"

namespace ptycho {

using ad::ComplexTensor;

/// Plain gradient descent: x -= lr * grad, applied to both planes.
void gd_step(ComplexTensor& x, const ComplexTensor& grad, double lr);

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam moments; the real and imaginary planes are treated as
/// independent real parameters.
struct AdamState {
  ComplexTensor m;  // first moment
  ComplexTensor v;  // second moment (per plane, stored in re/im)
  long step = 0;

  void reset(int rows, int cols) {
    m = ComplexTensor(rows, cols);
    v = ComplexTensor(rows, cols);
    step = 0;
  }
};

void adam_step(AdamState& state, ComplexTensor& x, const ComplexTensor& grad,
               const AdamConfig& cfg);

/// Index batches for one epoch: a seeded permutation of {0..count-1} split
/// into ceil(count/batch_size) chunks. The schedule is a pure function of
/// (count, batch_size, seed, epoch).
std::vector<std::vector<int>> batch_iterator(int count, int batch_size,
                                             std::uint64_t seed, int epoch);

}  // namespace ptycho
