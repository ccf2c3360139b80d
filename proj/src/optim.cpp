#include "ptycho/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "ptycho/rng.hpp"

namespace ptycho {

void gd_step(ComplexTensor& x, const ComplexTensor& grad, double lr) {
  if (!x.same_shape(grad)) {
    throw std::invalid_argument("gd_step: gradient shape mismatch");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    x.re()[i] -= lr * grad.re()[i];
    x.im()[i] -= lr * grad.im()[i];
  }
}

void adam_step(AdamState& state, ComplexTensor& x, const ComplexTensor& grad,
               const AdamConfig& cfg) {
  if (!x.same_shape(grad)) {
    throw std::invalid_argument("adam_step: gradient shape mismatch");
  }
  if (state.m.size() == 0) state.reset(x.rows(), x.cols());
  if (!state.m.same_shape(x)) {
    throw std::invalid_argument("adam_step: state shape mismatch");
  }
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
  const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double gr = grad.re()[i], gi = grad.im()[i];
    state.m.re()[i] = cfg.beta1 * state.m.re()[i] + (1.0 - cfg.beta1) * gr;
    state.m.im()[i] = cfg.beta1 * state.m.im()[i] + (1.0 - cfg.beta1) * gi;
    state.v.re()[i] = cfg.beta2 * state.v.re()[i] + (1.0 - cfg.beta2) * gr * gr;
    state.v.im()[i] = cfg.beta2 * state.v.im()[i] + (1.0 - cfg.beta2) * gi * gi;
    x.re()[i] -= cfg.lr * (state.m.re()[i] / bc1) /
                 (std::sqrt(state.v.re()[i] / bc2) + cfg.eps);
    x.im()[i] -= cfg.lr * (state.m.im()[i] / bc1) /
                 (std::sqrt(state.v.im()[i] / bc2) + cfg.eps);
  }
}

std::vector<std::vector<int>> batch_iterator(int count, int batch_size,
                                             std::uint64_t seed, int epoch) {
  if (count < 1 || batch_size < 1 || batch_size > count) {
    throw std::invalid_argument("batch_iterator: need 1 <= batch_size <= count");
  }
  Rng rng = Rng::keyed(seed, 0x9a7cb1u, static_cast<std::uint64_t>(epoch));
  const std::vector<int> perm = random_permutation(count, rng);
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < count; start += batch_size) {
    const int end = std::min(count, start + batch_size);
    batches.emplace_back(perm.begin() + start, perm.begin() + end);
  }
  return batches;
}

}  // namespace ptycho
