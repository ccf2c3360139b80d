#pragma once

#include <vector>

#include "ptycho/tape.hpp"

namespace ptycho {

using ad::ComplexTensor;
using ad::Variable;

enum class LossDomain { kAmplitude, kIntensity };

struct LossReport {
  double data_fidelity = 0.0;
  double regularization = 0.0;
  double total = 0.0;
  std::vector<double> per_pattern;
};

/// Sum over the batch of ||sqrt(sim) - sqrt(meas)||^2 (amplitude domain, the
/// default) or ||sim - meas||^2 (intensity domain). Measured intensities are
/// clamped at zero; the number of clamped samples is reported through
/// `clamped`. Per-pattern residuals land in `report` when given.
Variable data_fidelity(const std::vector<Variable>& sims,
                       const std::vector<const ComplexTensor*>& measured,
                       LossDomain domain, int* clamped = nullptr,
                       std::vector<double>* per_pattern = nullptr);

struct RegWeights {
  double object_range = 1e2;   // penalty on |O| > 1
  double probe_energy = 1e2;   // penalty on total probe energy drift
  double position_l1 = 1e-3;   // L1 on the position corrections
};

struct RegBreakdown {
  double object_range = 0.0;
  double probe_energy = 0.0;
  double position_l1 = 0.0;
};

/// Energy-based regularizer:
///   w_O * sum(relu(|O| - 1)^2) + w_P * (sum_p ||P_p||^2 - E)^2
///   + w_t * sum |corrections|_1.
/// The position term covers the corrections present on the current tape
/// (i.e. the batch members during stochastic steps).
Variable regularization(const Variable& object,
                        const std::vector<Variable>& probe_modes,
                        const std::vector<Variable>& corrections,
                        const RegWeights& weights, double probe_energy_target,
                        RegBreakdown* breakdown = nullptr);

}  // namespace ptycho
