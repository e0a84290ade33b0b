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

#include <array>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/serialize.hpp"

namespace qtomo {

/// Configuration shared by the simulation studies. `sweep_m`/`sweep_n`
/// parameterize the grids of the likelihood-comparison and variance
/// studies; the element study uses `m_probes`/`n_per_axis` directly.
struct ExperimentConfig {
  std::string experiment = "elements";
  ChannelSpec channel = ChannelSpec::mixture(
      0.5, ChannelSpec::depolarizing(),
      ChannelSpec::rotation(std::numbers::pi / 8));
  int m_probes = 20;
  std::int64_t n_per_axis = 1000;
  int trials = 200;
  RngSeed seed{20260821, 0};
  std::vector<Axis> in_axes{Axis::x, Axis::y, Axis::z};
  std::vector<Axis> out_axes{Axis::x, Axis::y, Axis::z};
  bool exact_frequencies = false;
  std::vector<int> sweep_m{15, 30, 45};
  std::vector<std::int64_t> sweep_n{50, 100, 500, 1000};
  MleOptions opts{4000, 1e-11, 1e-10, 0.0, tol::prob_floor};
};

Json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j);

/// Optional progress sink; receives one line per completed unit of work.
using ProgressLog = std::function<void(const std::string&)>;

/// The twelve free real parameters of a trace-preserving qubit Choi
/// operator: the diagonal entries S00 and S22 plus the real and imaginary
/// parts of S01, S02, S03, S12 and S23 (the remaining entries follow from
/// Hermiticity and trace preservation).
std::array<double, 12> choi_free_elements(const ChoiOperator& s);
const std::array<std::string, 12>& choi_free_element_names();

/// Percentile bootstrap confidence interval for the mean of `values`.
std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values,
                                            int n_boot, RngSeed seed,
                                            double alpha = 0.05);

/// Element study: estimate the channel from `trials` independently sampled
/// joint datasets and compare the free Choi elements against the truth.
struct ElementsResult {
  std::array<double, 12> true_values{};
  /// Estimate from the first trial's dataset.
  std::array<double, 12> canonical_estimate{};
  std::array<double, 12> mc_mean{};
  /// Ensemble standard deviation per element (one-sigma error bar).
  std::array<double, 12> mc_std{};
  int trials = 0;
  bool canonical_converged = false;
};
ElementsResult run_elements(const ExperimentConfig& config,
                            const ProgressLog& log = nullptr);

/// Likelihood-comparison study: joint estimation versus the sequential
/// baseline over a grid of probe counts and sample sizes. delta is the
/// joint-minus-sequential log-likelihood per trial.
struct LikelihoodComparisonPoint {
  int m_probes = 0;
  std::int64_t n_per_axis = 0;
  int trials = 0;
  double mean_delta = 0.0;
  double se_delta = 0.0;
  double min_delta = 0.0;
  double frac_improved = 0.0;
  std::vector<double> deltas;
};
struct LikelihoodComparisonResult {
  std::vector<LikelihoodComparisonPoint> points;
};
LikelihoodComparisonResult run_likelihood_comparison(
    const ExperimentConfig& config, const ProgressLog& log = nullptr);

/// Variance study: mean squared error of the exact process estimator versus
/// the trace-only shortcut, per sample size. The confidence interval is a
/// paired bootstrap for mean(sq_approx - sq_exact).
struct VarianceComparisonPoint {
  std::int64_t n_per_axis = 0;
  int trials = 0;
  double var_exact = 0.0;
  double var_approx = 0.0;
  double ratio = 0.0;
  double diff_ci_lo = 0.0;
  double diff_ci_hi = 0.0;
};
struct VarianceComparisonResult {
  std::vector<VarianceComparisonPoint> points;
  std::vector<ComparisonReport> reports;
};
VarianceComparisonResult run_variance_comparison(
    const ExperimentConfig& config, const ProgressLog& log = nullptr);

std::string elements_csv(const ElementsResult& result);
std::string likelihood_comparison_csv(const LikelihoodComparisonResult& result);
std::string variance_comparison_csv(const VarianceComparisonResult& result);

/// Run the configured experiment and write its CSV plus a manifest.json
/// into `out_dir` (which must exist). Returns the written file names.
std::vector<std::string> run_experiment_to_dir(const ExperimentConfig& config,
                                               const std::string& out_dir,
                                               const ProgressLog& log = nullptr);

}  // namespace qtomo
