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

#include <cstdint>
#include <optional>
#include <vector>

#include "qtomo/simkit.hpp"

namespace qtomo {

/// Gaussian (least-squares) approximation to the log-likelihood:
/// -sum_l (f_l - p_l)^2 / (2 sigma_l^2) with sigma_l^2 =
/// max(p_l (1 - p_l), 1e-12) / n_samples. Valid for large samples; unlike
/// the exact likelihood it penalizes deviations symmetrically.
double gaussian_loglike(const StateDataset& ds, const DensityMatrix& rho,
                        double n_samples);

struct GaussianOptions {
  /// Random restarts beyond the maximally mixed start.
  int n_starts = 5;
  int max_iters = 2000;
  /// Relative finite-difference step for the gradient.
  double fd_step = 1e-6;
  /// Stop when the objective gain per step falls below this.
  double tol_improve = 1e-13;
  RngSeed seed{0, 0};
};

/// Maximize the Gaussian objective over density matrices via the
/// factorization rho = A^dagger A / Tr[A^dagger A] and gradient ascent with
/// backtracking, keeping the best of several starts. The report's loglike
/// is the Gaussian objective value, not the exact likelihood.
MleReport estimate_state_gaussian(const StateDataset& ds, double n_samples,
                                  const GaussianOptions& opts = {});

/// Process estimation with the trace-preservation constraint replaced by a
/// global trace normalization Tr[S] = dim H: the update S -> K S K is
/// rescaled by a scalar instead of the operator multiplier. Without the
/// partial-trace constraint the raw outcome values Tr[S G_ml] need not sum
/// to one over a probe's outcomes, so each probe's record is compared
/// against the normalized distribution p_ml / (sum_l p_ml); on any
/// trace-preserving iterate that normalization is the identity and K equals
/// the exact method's operator. Cheaper per iteration but the estimate is
/// generally not trace preserving; the report's tp_residual records how far
/// off it ends up, and the report's loglike is the normalized objective.
ProcessMleReport estimate_process_trace_only(
    const ProcessDataset& ds, const MleOptions& opts = {},
    std::optional<ChoiOperator> init = std::nullopt);

struct ComparisonConfig {
  ChannelSpec channel = ChannelSpec::mixture(
      0.5, ChannelSpec::depolarizing(), ChannelSpec::rotation(0.0));
  /// Probe states; empty selects the six Pauli eigenstates.
  std::vector<DensityMatrix> probes;
  std::vector<Axis> out_axes{Axis::x, Axis::y, Axis::z};
  std::int64_t n_per_axis = 1000;
  int trials = 100;
  bool exact_frequencies = false;
  RngSeed seed{0, 0};
  MleOptions opts{};
};

struct ComparisonReport {
  /// Mean squared Frobenius distance to the true Choi operator.
  double var_exact = 0.0;
  double var_approx = 0.0;
  std::vector<double> sq_errors_exact;
  std::vector<double> sq_errors_approx;
  int trials = 0;
};

/// Ensemble comparison of the exact estimator against the trace-only
/// shortcut on data sampled from the configured channel.
ComparisonReport compare_variances(const ComparisonConfig& config);

}  // namespace qtomo
