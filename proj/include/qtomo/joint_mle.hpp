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
#include <utility>
#include <vector>

#include "qtomo/process_mle.hpp"

namespace qtomo {

/// Data gathered for one unknown probe state: part of its copies measured
/// directly (input side), the rest sent through the unknown channel and
/// measured at the output.
struct JointProbeData {
  Povm input_povm;
  CountRecord input_record;
  Povm output_povm;
  CountRecord output_record;
};

/// Dataset for simultaneous state-and-process estimation. All probes share
/// the channel input space H and output space K (canonical relabeling
/// happens on construction).
class JointDataset {
 public:
  explicit JointDataset(std::vector<JointProbeData> probes);

  std::size_t n_probes() const { return probes_.size(); }
  const JointProbeData& probe(std::size_t m) const { return probes_.at(m); }
  const SpaceLabel& input_space() const { return input_space_; }
  const SpaceLabel& output_space() const { return output_space_; }

  /// True when some probe's input POVM does not span the Hermitian
  /// operators on H, so the probe is not determined by its own input data
  /// alone.
  bool input_span_deficient() const { return input_span_deficient_; }

 private:
  std::vector<JointProbeData> probes_;
  SpaceLabel input_space_;
  SpaceLabel output_space_;
  bool input_span_deficient_ = false;
};

struct JointReport {
  std::vector<DensityMatrix> probe_estimates;
  ChoiOperator process_estimate;
  double loglike = 0.0;
  int iterations = 0;
  bool converged = false;
  bool input_span_deficient = false;
  /// Joint log-likelihood after initialization and after each sweep.
  std::vector<double> loglike_trace;
};

/// Called after each accepted sweep with the current iterates.
using JointObserver = std::function<void(const std::vector<DensityMatrix>&,
                                         const ChoiOperator&, int)>;

/// Optional starting point for estimate_joint.
struct JointInit {
  std::vector<DensityMatrix> probes;
  ChoiOperator process;
};

/// Normalized joint log-likelihood: input and output records of every probe
/// each contribute sum f ln p with their own frequencies.
double joint_log_likelihood(const JointDataset& ds,
                            const std::vector<DensityMatrix>& probes,
                            const ChoiOperator& s,
                            double floor = tol::prob_floor);

/// Likelihood kernel for probe m at the current iterates: the usual state
/// kernel for its input record plus the channel pull-back of the output
/// kernel, Tr_K[S^{T_H} (1 x sum_l (F_ml / P_ml) Pi_ml)].
Operator rm_kernel(const JointDataset& ds, std::size_t m,
                   const DensityMatrix& rho_m, const ChoiOperator& s,
                   double floor = tol::prob_floor);

/// One Gauss-Seidel sweep: update every probe with the current channel,
/// then update the channel from the refreshed probes. No monotonicity
/// guard; `damping` mixes each update with its predecessor.
std::pair<std::vector<DensityMatrix>, ChoiOperator> joint_step(
    const JointDataset& ds, const std::vector<DensityMatrix>& probes,
    const ChoiOperator& s, double damping = 0.0,
    double floor = tol::prob_floor);

/// Iterate guarded Gauss-Seidel sweeps from `init` (default: maximally
/// mixed probes and the maximally depolarizing channel). Each sub-update
/// retries with increasing damping if it would lower its own likelihood
/// terms, so the per-sweep likelihood trace never decreases beyond
/// evaluation rounding noise.
JointReport estimate_joint(const JointDataset& ds, const MleOptions& opts = {},
                           std::optional<JointInit> init = std::nullopt,
                           const JointObserver& observer = nullptr);

/// Two-stage reference pipeline: estimate each probe from its input record
/// alone, then estimate the channel treating those estimates as known
/// probes. Reports the joint likelihood of the combined result; also the
/// natural victim of input POVMs that do not determine the probes.
JointReport sequential_baseline(const JointDataset& ds,
                                const MleOptions& opts = {});

}  // namespace qtomo
