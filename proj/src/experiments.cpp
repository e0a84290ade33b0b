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

#include "qtomo/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qtomo {
namespace {

constexpr std::uint64_t kTrialSalt = 0xe21;
constexpr std::uint64_t kPointSalt = 0xe22;
constexpr std::uint64_t kBootSalt = 0xe23;

struct FreeElement {
  Eigen::Index row, col;
  bool imag;
};

constexpr std::array<FreeElement, 12> kFreeElements{{
    {0, 0, false},
    {2, 2, false},
    {0, 1, false},
    {0, 1, true},
    {0, 2, false},
    {0, 2, true},
    {0, 3, false},
    {0, 3, true},
    {1, 2, false},
    {1, 2, true},
    {2, 3, false},
    {2, 3, true},
}};

void emit(const ProgressLog& log, const std::string& line) {
  if (log) log(line);
}

}  // namespace

std::array<double, 12> choi_free_elements(const ChoiOperator& s) {
  if (s.input_space().dim != 2 || s.output_space().dim != 2) {
    throw std::invalid_argument(
        "choi_free_elements: defined for qubit channels only");
  }
  std::array<double, 12> out{};
  for (std::size_t i = 0; i < kFreeElements.size(); ++i) {
    const auto& e = kFreeElements[i];
    const Complex v = s.mat()(e.row, e.col);
    out[i] = e.imag ? v.imag() : v.real();
  }
  return out;
}

const std::array<std::string, 12>& choi_free_element_names() {
  static const std::array<std::string, 12> names{
      "S00_re", "S22_re", "S01_re", "S01_im", "S02_re", "S02_im",
      "S03_re", "S03_im", "S12_re", "S12_im", "S23_re", "S23_im"};
  return names;
}

std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values,
                                            int n_boot, RngSeed seed,
                                            double alpha) {
  if (values.empty() || n_boot <= 0) {
    throw std::invalid_argument("bootstrap_mean_ci: empty input");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("bootstrap_mean_ci: alpha outside (0, 1)");
  }
  StreamRng rng(seed.substream(kBootSalt));
  const std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(n_boot));
  for (auto& m : means) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t pick =
          static_cast<std::size_t>(rng.next_u64() % n);
      acc += values[pick];
    }
    m = acc / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const auto pick_quantile = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };
  return {pick_quantile(alpha / 2.0), pick_quantile(1.0 - alpha / 2.0)};
}

Json experiment_config_to_json(const ExperimentConfig& config) {
  return Json{
      {"experiment", config.experiment},
      {"channel", channel_to_json(config.channel)},
      {"m_probes", config.m_probes},
      {"n_per_axis", config.n_per_axis},
      {"trials", config.trials},
      {"seed", {{"master", config.seed.master}, {"stream", config.seed.stream}}},
      {"in_axes", axes_to_json(config.in_axes)},
      {"out_axes", axes_to_json(config.out_axes)},
      {"exact_frequencies", config.exact_frequencies},
      {"sweep_m", config.sweep_m},
      {"sweep_n", config.sweep_n},
      {"estimator",
       {{"max_iters", config.opts.max_iters},
        {"tol_loglike", config.opts.tol_loglike},
        {"tol_fixedpoint", config.opts.tol_fixedpoint},
        {"damping", config.opts.damping}}},
  };
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  if (!j.is_object()) {
    throw SchemaError("experiment config: expected an object");
  }
  ExperimentConfig config;
  if (j.contains("experiment")) {
    if (!j["experiment"].is_string()) {
      throw SchemaError("experiment config: 'experiment' must be a string");
    }
    config.experiment = j["experiment"].get<std::string>();
  }
  if (j.contains("channel")) {
    config.channel = channel_from_json(j["channel"]);
  }
  const auto get_int = [&](const char* key, int min_value) {
    const Json& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < min_value) {
      throw SchemaError(std::string("experiment config: '") + key +
                        "' must be an integer >= " +
                        std::to_string(min_value));
    }
    return v.get<std::int64_t>();
  };
  if (j.contains("m_probes")) {
    config.m_probes = static_cast<int>(get_int("m_probes", 1));
  }
  if (j.contains("n_per_axis")) {
    config.n_per_axis = get_int("n_per_axis", 1);
  }
  if (j.contains("trials")) {
    config.trials = static_cast<int>(get_int("trials", 1));
  }
  if (j.contains("seed")) {
    const Json& s = j["seed"];
    if (!s.is_object() || !s.contains("master")) {
      throw SchemaError(
          "experiment config: 'seed' must be {master[, stream]}");
    }
    config.seed.master = s["master"].get<std::uint64_t>();
    config.seed.stream =
        s.contains("stream") ? s["stream"].get<std::uint64_t>() : 0;
  }
  if (j.contains("in_axes")) config.in_axes = axes_from_json(j["in_axes"]);
  if (j.contains("out_axes")) config.out_axes = axes_from_json(j["out_axes"]);
  if (j.contains("exact_frequencies")) {
    if (!j["exact_frequencies"].is_boolean()) {
      throw SchemaError(
          "experiment config: 'exact_frequencies' must be a boolean");
    }
    config.exact_frequencies = j["exact_frequencies"].get<bool>();
  }
  if (j.contains("sweep_m")) {
    if (!j["sweep_m"].is_array() || j["sweep_m"].empty()) {
      throw SchemaError("experiment config: 'sweep_m' must be nonempty");
    }
    config.sweep_m.clear();
    for (const auto& v : j["sweep_m"]) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw SchemaError("experiment config: bad sweep_m entry");
      }
      config.sweep_m.push_back(static_cast<int>(v.get<std::int64_t>()));
    }
  }
  if (j.contains("sweep_n")) {
    if (!j["sweep_n"].is_array() || j["sweep_n"].empty()) {
      throw SchemaError("experiment config: 'sweep_n' must be nonempty");
    }
    config.sweep_n.clear();
    for (const auto& v : j["sweep_n"]) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw SchemaError("experiment config: bad sweep_n entry");
      }
      config.sweep_n.push_back(v.get<std::int64_t>());
    }
  }
  if (j.contains("estimator")) {
    const Json& e = j["estimator"];
    if (!e.is_object()) {
      throw SchemaError("experiment config: 'estimator' must be an object");
    }
    if (e.contains("max_iters")) {
      config.opts.max_iters = e["max_iters"].get<int>();
      if (config.opts.max_iters < 1) {
        throw SchemaError("experiment config: estimator max_iters < 1");
      }
    }
    if (e.contains("tol_loglike")) {
      config.opts.tol_loglike = e["tol_loglike"].get<double>();
    }
    if (e.contains("tol_fixedpoint")) {
      config.opts.tol_fixedpoint = e["tol_fixedpoint"].get<double>();
    }
    if (e.contains("damping")) {
      config.opts.damping = e["damping"].get<double>();
      if (config.opts.damping < 0.0 || config.opts.damping >= 1.0) {
        throw SchemaError("experiment config: estimator damping outside "
                          "[0, 1)");
      }
    }
  }
  return config;
}

ElementsResult run_elements(const ExperimentConfig& config,
                            const ProgressLog& log) {
  const ChoiOperator s_true = build_choi(config.channel);
  ElementsResult result;
  result.true_values = choi_free_elements(s_true);
  result.trials = config.trials;

  std::vector<std::array<double, 12>> samples;
  samples.reserve(static_cast<std::size_t>(config.trials));
  for (int t = 0; t < config.trials; ++t) {
    const JointSample sample = generate_joint_dataset(
        s_true, config.m_probes, config.in_axes, config.out_axes,
        config.n_per_axis,
        config.seed.substream(kTrialSalt)
            .substream(static_cast<std::uint64_t>(t)),
        config.exact_frequencies);
    const JointReport report = estimate_joint(sample.dataset, config.opts);
    samples.push_back(choi_free_elements(report.process_estimate));
    if (t == 0) {
      result.canonical_estimate = samples.back();
      result.canonical_converged = report.converged;
    }
    if ((t + 1) % 25 == 0) {
      emit(log, "elements: trial " + std::to_string(t + 1) + "/" +
                    std::to_string(config.trials));
    }
  }

  for (std::size_t i = 0; i < 12; ++i) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s[i];
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (const auto& s : samples) var += (s[i] - mean) * (s[i] - mean);
    var = samples.size() > 1
              ? var / static_cast<double>(samples.size() - 1)
              : 0.0;
    result.mc_mean[i] = mean;
    result.mc_std[i] = std::sqrt(var);
  }
  return result;
}

LikelihoodComparisonResult run_likelihood_comparison(
    const ExperimentConfig& config, const ProgressLog& log) {
  const ChoiOperator s_true = build_choi(config.channel);
  LikelihoodComparisonResult result;
  std::uint64_t point_index = 0;
  for (int m : config.sweep_m) {
    for (std::int64_t n : config.sweep_n) {
      const RngSeed point_seed =
          config.seed.substream(kPointSalt).substream(point_index++);
      LikelihoodComparisonPoint point;
      point.m_probes = m;
      point.n_per_axis = n;
      point.trials = config.trials;
      point.min_delta = std::numeric_limits<double>::infinity();
      for (int t = 0; t < config.trials; ++t) {
        const JointSample sample = generate_joint_dataset(
            s_true, m, config.in_axes, config.out_axes, n,
            point_seed.substream(kTrialSalt)
                .substream(static_cast<std::uint64_t>(t)),
            config.exact_frequencies);
        const JointReport seq =
            sequential_baseline(sample.dataset, config.opts);
        JointReport joint = estimate_joint(sample.dataset, config.opts);
        if (joint.loglike < seq.loglike) {
          // The default start found a worse stationary point; continue the
          // ascent from the sequential solution instead.
          JointReport warm = estimate_joint(
              sample.dataset, config.opts,
              JointInit{seq.probe_estimates, seq.process_estimate});
          if (warm.loglike > joint.loglike) joint = std::move(warm);
        }
        const double delta = joint.loglike - seq.loglike;
        point.deltas.push_back(delta);
        point.mean_delta += delta;
        point.min_delta = std::min(point.min_delta, delta);
        if (delta > 0.0) point.frac_improved += 1.0;
      }
      point.mean_delta /= static_cast<double>(config.trials);
      point.frac_improved /= static_cast<double>(config.trials);
      double var = 0.0;
      for (double d : point.deltas) {
        var += (d - point.mean_delta) * (d - point.mean_delta);
      }
      if (config.trials > 1) {
        var /= static_cast<double>(config.trials - 1);
        point.se_delta = std::sqrt(var / config.trials);
      }
      result.points.push_back(std::move(point));
      emit(log, "likelihood comparison: finished m=" + std::to_string(m) +
                    " n=" + std::to_string(n));
    }
  }
  return result;
}

VarianceComparisonResult run_variance_comparison(const ExperimentConfig& config,
                                                 const ProgressLog& log) {
  VarianceComparisonResult result;
  std::uint64_t point_index = 0;
  for (std::int64_t n : config.sweep_n) {
    ComparisonConfig cc;
    cc.channel = config.channel;
    cc.out_axes = config.out_axes;
    cc.n_per_axis = n;
    cc.trials = config.trials;
    cc.exact_frequencies = config.exact_frequencies;
    cc.seed = config.seed.substream(kPointSalt).substream(point_index);
    cc.opts = config.opts;
    const ComparisonReport report = compare_variances(cc);

    VarianceComparisonPoint point;
    point.n_per_axis = n;
    point.trials = report.trials;
    point.var_exact = report.var_exact;
    point.var_approx = report.var_approx;
    point.ratio = report.var_exact > 0.0
                      ? report.var_approx / report.var_exact
                      : std::numeric_limits<double>::infinity();
    std::vector<double> diffs(report.sq_errors_exact.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      diffs[i] = report.sq_errors_approx[i] - report.sq_errors_exact[i];
    }
    auto ci = bootstrap_mean_ci(
        diffs, 2000, config.seed.substream(kBootSalt).substream(point_index));
    point.diff_ci_lo = ci.first;
    point.diff_ci_hi = ci.second;
    result.points.push_back(point);
    result.reports.push_back(report);
    emit(log, "variance comparison: finished n=" + std::to_string(n));
    ++point_index;
  }
  return result;
}

std::string elements_csv(const ElementsResult& result) {
  std::ostringstream out;
  out << "element,true_value,estimate,mc_mean,mc_std,trials\n";
  const auto& names = choi_free_element_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ',' << csv_double(result.true_values[i]) << ','
        << csv_double(result.canonical_estimate[i]) << ','
        << csv_double(result.mc_mean[i]) << ','
        << csv_double(result.mc_std[i]) << ',' << result.trials << '\n';
  }
  return out.str();
}

std::string likelihood_comparison_csv(
    const LikelihoodComparisonResult& result) {
  std::ostringstream out;
  out << "m_probes,n_per_axis,trials,mean_delta,se_delta,min_delta,"
         "frac_improved\n";
  for (const auto& p : result.points) {
    out << p.m_probes << ',' << p.n_per_axis << ',' << p.trials << ','
        << csv_double(p.mean_delta) << ',' << csv_double(p.se_delta) << ','
        << csv_double(p.min_delta) << ',' << csv_double(p.frac_improved)
        << '\n';
  }
  return out.str();
}

std::string variance_comparison_csv(const VarianceComparisonResult& result) {
  std::ostringstream out;
  out << "n_per_axis,trials,var_exact,var_approx,ratio_approx_over_exact,"
         "diff_ci_lo,diff_ci_hi\n";
  for (const auto& p : result.points) {
    out << p.n_per_axis << ',' << p.trials << ','
        << csv_double(p.var_exact) << ',' << csv_double(p.var_approx) << ','
        << csv_double(p.ratio) << ',' << csv_double(p.diff_ci_lo) << ','
        << csv_double(p.diff_ci_hi) << '\n';
  }
  return out.str();
}

std::vector<std::string> run_experiment_to_dir(const ExperimentConfig& config,
                                               const std::string& out_dir,
                                               const ProgressLog& log) {
  std::vector<std::string> written;
  Json manifest{{"format", "qtomo-experiment"},
                {"version", 1},
                {"config", experiment_config_to_json(config)}};

  if (config.experiment == "elements") {
    const ElementsResult result = run_elements(config, log);
    write_text_file(out_dir + "/elements.csv", elements_csv(result));
    written.push_back("elements.csv");
    manifest["results"] = {{"canonical_converged", result.canonical_converged}};
  } else if (config.experiment == "likelihood-comparison") {
    const LikelihoodComparisonResult result =
        run_likelihood_comparison(config, log);
    write_text_file(out_dir + "/likelihood_comparison.csv",
                    likelihood_comparison_csv(result));
    written.push_back("likelihood_comparison.csv");
  } else if (config.experiment == "variance-comparison") {
    const VarianceComparisonResult result =
        run_variance_comparison(config, log);
    write_text_file(out_dir + "/variance_comparison.csv",
                    variance_comparison_csv(result));
    written.push_back("variance_comparison.csv");
  } else {
    throw SchemaError("unknown experiment '" + config.experiment + "'");
  }

  manifest["outputs"] = written;
  write_text_file(out_dir + "/manifest.json", dump_json(manifest));
  written.push_back("manifest.json");
  return written;
}

}  // namespace qtomo
