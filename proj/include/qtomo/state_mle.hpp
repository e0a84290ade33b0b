// Copyright 2026 The qtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qtomo/quantum_objects.hpp"

namespace qtomo {

/// Measurement data for state reconstruction: one POVM and the outcome
/// tallies observed under it.
struct StateDataset {
  Povm povm;
  CountRecord record;

  StateDataset() = default;
  StateDataset(Povm povm_in, CountRecord record_in);
};

/// Shared knobs for the iterative estimators.
struct MleOptions {
  int max_iters = 10000;
  /// Stop when the log-likelihood gain per iteration drops below this.
  double tol_loglike = 1e-10;
  /// Stop when the largest entry change per iteration drops below this.
  double tol_fixedpoint = 1e-9;
  /// Fixed mixing weight toward the previous iterate (0 = undamped).
  double damping = 0.0;
  /// Floor applied to model probabilities in logs and f/p ratios.
  double prob_floor = tol::prob_floor;
};

struct MleReport {
  DensityMatrix estimate;
  double loglike = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Log-likelihood after initialization and after each accepted iteration.
  std::vector<double> loglike_trace;
};

/// Called with each accepted iterate (1-based iteration index).
using StateObserver = std::function<void(const DensityMatrix&, int)>;

/// Normalized log-likelihood sum_l f_l ln p_l over outcomes with f_l > 0,
/// with model probabilities floored at `floor`.
double log_likelihood(const StateDataset& ds, const DensityMatrix& rho,
                      double floor = tol::prob_floor);

/// The likelihood kernel R(rho) = sum_l (f_l / p_l) E_l. At an interior
/// maximum R acts as the identity on the support of rho.
Operator r_kernel(const StateDataset& ds, const DensityMatrix& rho,
                  double floor = tol::prob_floor);

/// One fixed-point update rho -> R rho R / Tr[...], optionally mixed with
/// the previous iterate: (1 - damping) * update + damping * rho.
DensityMatrix mle_step(const StateDataset& ds, const DensityMatrix& rho,
                       double damping = 0.0, double floor = tol::prob_floor);

/// Iterate mle_step from `init` (default: maximally mixed) until the
/// likelihood gain or the iterate movement falls below tolerance. Each
/// iteration is guarded: if the undamped update would lower the likelihood,
/// it is retried with damping 0.5, 0.75, 0.875, ... so the reported
/// likelihood trace never decreases beyond evaluation rounding noise.
MleReport estimate_state(const StateDataset& ds, const MleOptions& opts = {},
                         std::optional<DensityMatrix> init = std::nullopt,
                         const StateObserver& observer = nullptr);

}  // namespace qtomo
