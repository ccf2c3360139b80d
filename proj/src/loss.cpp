#include "ptycho/loss.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace ptycho {

namespace {

using ad::Tape;
using TensorPtr = std::shared_ptr<const ComplexTensor>;

// Guard for the amplitude-domain derivative 1 - m/sqrt(s): keeps the factor
// finite as s -> 0 while staying exact wherever s is representable.
constexpr double kAmplitudeFloor = 1e-12;

Variable fused_scalar(const Variable& sim, TensorPtr prepared, bool amplitude) {
  const ComplexTensor& s = sim.value();
  if (!s.same_shape(*prepared)) {
    throw std::invalid_argument("data_fidelity: sim/measured shape mismatch");
  }
  double loss = 0.0;
  if (amplitude) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r = std::sqrt(std::max(s.re()[i], 0.0)) - prepared->re()[i];
      loss += r * r;
    }
  } else {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double r = s.re()[i] - prepared->re()[i];
      loss += r * r;
    }
  }
  Tape* tape = sim.tape();
  auto out = std::make_shared<const ComplexTensor>(ComplexTensor::scalar(loss));
  if (!tape || sim.node() < 0) {
    return Variable::constant(ComplexTensor(*out), /*real_only=*/true);
  }
  const int is = sim.node();
  TensorPtr sv = sim.value_ptr();
  auto backward = [is, sv, prepared, amplitude](Tape& t,
                                                const ComplexTensor& g) {
    const double g0 = g.re(0, 0);
    ComplexTensor gs(sv->rows(), sv->cols());
    if (amplitude) {
      for (std::size_t i = 0; i < gs.size(); ++i) {
        const double amp =
            std::max(std::sqrt(std::max(sv->re()[i], 0.0)), kAmplitudeFloor);
        gs.re()[i] = g0 * (1.0 - prepared->re()[i] / amp);
      }
    } else {
      for (std::size_t i = 0; i < gs.size(); ++i) {
        gs.re()[i] = g0 * 2.0 * (sv->re()[i] - prepared->re()[i]);
      }
    }
    t.accumulate_adjoint(is, gs);
  };
  const int id = tape->push_node(out, /*real_only=*/true, std::move(backward));
  return tape->wrap(id, out, /*real_only=*/true);
}

}  // namespace

Variable data_fidelity(const std::vector<Variable>& sims,
                       const std::vector<const ComplexTensor*>& measured,
                       LossDomain domain, int* clamped,
                       std::vector<double>* per_pattern) {
  if (sims.empty() || sims.size() != measured.size()) {
    throw std::invalid_argument("data_fidelity: batch size mismatch");
  }
  const bool amplitude = domain == LossDomain::kAmplitude;

  // The measured side is constant: clamp once, take square roots once.
  int n_clamped = 0;
  const int cols = measured[0]->cols();
  int total_rows = 0;
  for (const ComplexTensor* m : measured) total_rows += m->rows();
  ComplexTensor prepared(total_rows, cols);
  int off = 0;
  for (const ComplexTensor* m : measured) {
    for (int r = 0; r < m->rows(); ++r) {
      for (int c = 0; c < cols; ++c) {
        double v = m->re(r, c);
        if (v < 0.0) {
          v = 0.0;
          ++n_clamped;
        }
        prepared.re(off + r, c) = amplitude ? std::sqrt(v) : v;
      }
    }
    off += m->rows();
  }
  if (clamped) *clamped = n_clamped;

  if (per_pattern) {
    per_pattern->clear();
    int row = 0;
    for (std::size_t j = 0; j < sims.size(); ++j) {
      const ComplexTensor& s = sims[j].value();
      double acc = 0.0;
      for (int r = 0; r < s.rows(); ++r) {
        for (int c = 0; c < cols; ++c) {
          const double sim_v = amplitude
                                   ? std::sqrt(std::max(s.re(r, c), 0.0))
                                   : s.re(r, c);
          const double d = sim_v - prepared.re(row + r, c);
          acc += d * d;
        }
      }
      per_pattern->push_back(acc);
      row += s.rows();
    }
  }

  Variable stacked = ad::stack_rows(sims);
  return fused_scalar(stacked,
                      std::make_shared<const ComplexTensor>(std::move(prepared)),
                      amplitude);
}

Variable regularization(const Variable& object,
                        const std::vector<Variable>& probe_modes,
                        const std::vector<Variable>& corrections,
                        const RegWeights& weights, double probe_energy_target,
                        RegBreakdown* breakdown) {
  // |O| must not exceed unit transmission.
  Variable over = ad::relu(
      ad::add_scalar(ad::sqrt_positive(ad::modulus_squared(object)), -1.0));
  Variable object_term = ad::scale(ad::sum(ad::mul(over, over)),
                                   weights.object_range);

  // Total probe energy pinned to the target.
  Variable energy;
  for (const Variable& mode : probe_modes) {
    Variable e = ad::sum(ad::modulus_squared(mode));
    energy = energy.defined() ? ad::add(energy, e) : e;
  }
  Variable drift = ad::add_scalar(energy, -probe_energy_target);
  Variable probe_term =
      ad::scale(ad::mul(drift, drift), weights.probe_energy);

  Variable total = ad::add(object_term, probe_term);

  Variable l1;
  for (const Variable& c : corrections) {
    Variable a = ad::sum(ad::abs_real(c));
    l1 = l1.defined() ? ad::add(l1, a) : a;
  }
  if (l1.defined()) {
    Variable pos_term = ad::scale(l1, weights.position_l1);
    if (breakdown) breakdown->position_l1 = pos_term.value().re(0, 0);
    total = ad::add(total, pos_term);
  }
  if (breakdown) {
    breakdown->object_range = object_term.value().re(0, 0);
    breakdown->probe_energy = probe_term.value().re(0, 0);
  }
  return total;
}

}  // namespace ptycho
