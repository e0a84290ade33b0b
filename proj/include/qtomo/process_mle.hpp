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

#include "qtomo/state_mle.hpp"

namespace qtomo {

/// A known input probe. A separable probe is a state on the channel input
/// space alone; an entangled probe lives on (input, ancilla), with the first
/// space fed through the channel and the ancilla measured jointly with the
/// output.
struct ProbeSpec {
  enum class Kind { separable, entangled };

  Kind kind = Kind::separable;
  DensityMatrix state;

  static ProbeSpec separable(DensityMatrix state);
  static ProbeSpec entangled(DensityMatrix state);
};

/// Measurement data for process reconstruction: per probe, the POVM applied
/// after the channel (on the output space, joined with the ancilla for
/// entangled probes) and the observed tallies.
///
/// On construction the probes and POVMs are relabeled to the canonical
/// spaces H (input), K (output) and B (ancilla), and each probe's data is
/// reduced to a list of effect operators G on (H, K) such that the outcome
/// probability is Tr[S G]. For a separable probe G is the tensor product of
/// the transposed probe with the POVM element; for an entangled probe the
/// ancilla is contracted out. Either way G is Hermitian and PSD, so the
/// fixed-point iteration treats both kinds uniformly.
class ProcessDataset {
 public:
  ProcessDataset(std::vector<ProbeSpec> probes, std::vector<Povm> povms,
                 std::vector<CountRecord> records);

  std::size_t n_probes() const { return probes_.size(); }
  const std::vector<ProbeSpec>& probes() const { return probes_; }
  const std::vector<Povm>& povms() const { return povms_; }
  const std::vector<CountRecord>& records() const { return records_; }

  const SpaceLabel& input_space() const { return input_space_; }
  const SpaceLabel& output_space() const { return output_space_; }

  /// Effect operators on (H, K) for probe m, one per outcome.
  const std::vector<Operator>& probe_effects(std::size_t m) const {
    return effects_.at(m);
  }
  const std::vector<double>& probe_frequencies(std::size_t m) const {
    return freqs_.at(m);
  }

 private:
  std::vector<ProbeSpec> probes_;
  std::vector<Povm> povms_;
  std::vector<CountRecord> records_;
  std::vector<std::vector<Operator>> effects_;
  std::vector<std::vector<double>> freqs_;
  SpaceLabel input_space_;
  SpaceLabel output_space_;
};

struct ProcessMleReport {
  ChoiOperator estimate;
  double loglike = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Max-entry deviation of Tr_out[estimate] from the input identity.
  double tp_residual = 0.0;
  std::vector<double> loglike_trace;
};

using ProcessObserver = std::function<void(const ChoiOperator&, int)>;

/// Normalized log-likelihood sum_{m,l} f_ml ln p_ml with probe records
/// weighted equally, model probabilities floored at `floor`.
double process_log_likelihood(const ProcessDataset& ds, const ChoiOperator& s,
                              double floor = tol::prob_floor);

/// The likelihood kernel K(S) = sum_{m,l} (f_ml / p_ml) G_ml on (H, K).
Operator k_kernel(const ProcessDataset& ds, const ChoiOperator& s,
                  double floor = tol::prob_floor);

/// Lagrange multiplier enforcing trace preservation: the operator
/// (Tr_out[K S K])^{1/2} tensored with the output identity.
Operator lambda_multiplier(const Operator& k, const ChoiOperator& s);

/// One fixed-point update S -> Lambda^-1 K S K Lambda^-1, followed by an
/// exact re-projection onto Tr_out[S] = 1 (a no-op when Lambda is well
/// conditioned), optionally mixed with the previous iterate.
ChoiOperator process_step(const ProcessDataset& ds, const ChoiOperator& s,
                          double damping = 0.0,
                          double floor = tol::prob_floor);

/// Iterate process_step from `init` (default: the maximally depolarizing
/// channel, input identity over the output dimension) with the same
/// monotonicity guard as estimate_state.
ProcessMleReport estimate_process(
    const ProcessDataset& ds, const MleOptions& opts = {},
    std::optional<ChoiOperator> init = std::nullopt,
    const ProcessObserver& observer = nullptr);

}  // namespace qtomo
