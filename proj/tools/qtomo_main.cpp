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

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qtomo/experiments.hpp"

namespace {

using namespace qtomo;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  bool exact_frequencies = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig config;
  if (!args.config_path.empty()) {
    config = experiment_config_from_json(parse_json_file(args.config_path));
  }
  if (args.seed.has_value()) {
    config.seed = RngSeed{*args.seed, 0};
  }
  if (args.trials.has_value()) {
    config.trials = *args.trials;
  }
  if (args.exact_frequencies) {
    config.exact_frequencies = true;
  }
  return config;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir +
                             "': " + ec.message());
  }
}

int cmd_simulate(const CommonArgs& args, const std::string& kind) {
  const ExperimentConfig config = load_config(args);
  ensure_out_dir(args.out_dir);
  const ChoiOperator s_true = build_choi(config.channel);

  Json dataset;
  Json truth;
  if (kind == "joint") {
    const JointSample sample = generate_joint_dataset(
        s_true, config.m_probes, config.in_axes, config.out_axes,
        config.n_per_axis, config.seed, config.exact_frequencies);
    dataset = joint_dataset_to_json(sample.dataset);
    Json probes = Json::array();
    for (const auto& p : sample.true_probes) {
      probes.push_back(operator_to_json(p.op()));
    }
    truth = Json{{"channel", operator_to_json(s_true.op())},
                 {"probes", std::move(probes)}};
  } else if (kind == "process") {
    const auto probes = pauli_eigenstates({"H", 2});
    dataset = process_dataset_to_json(generate_process_dataset(
        s_true, probes, config.out_axes, config.n_per_axis, config.seed,
        config.exact_frequencies));
    truth = Json{{"channel", operator_to_json(s_true.op())}};
  } else if (kind == "state") {
    const DensityMatrix rho =
        random_mixed_state(config.seed.substream(1), 2, {"H", 2});
    const Povm povm = pauli_povm(config.in_axes, {"H", 2});
    CountRecord record = measure_pauli_axes(
        rho, config.in_axes, config.n_per_axis, config.seed.substream(2),
        config.exact_frequencies, "state");
    dataset = state_dataset_to_json(StateDataset(povm, std::move(record)));
    truth = Json{{"state", operator_to_json(rho.op())}};
  } else {
    throw SchemaError("simulate: unknown dataset kind '" + kind + "'");
  }

  write_text_file(args.out_dir + "/dataset.json", dump_json(dataset));
  Json manifest{{"format", "qtomo-dataset"},
                {"kind", kind},
                {"config", experiment_config_to_json(config)},
                {"truth", std::move(truth)},
                {"outputs", Json::array({"dataset.json"})}};
  write_text_file(args.out_dir + "/manifest.json", dump_json(manifest));
  std::cout << "wrote " << args.out_dir << "/dataset.json\n";
  return kExitOk;
}

int cmd_estimate(const std::string& data_path, std::string method,
                 const std::string& out_dir, const MleOptions& opts,
                 double n_samples_override) {
  const Json data = parse_json_file(data_path);
  const DatasetType type = dataset_type(data);
  if (method == "auto") {
    switch (type) {
      case DatasetType::state: method = "state"; break;
      case DatasetType::process: method = "process"; break;
      case DatasetType::joint: method = "joint"; break;
    }
  }
  ensure_out_dir(out_dir);

  Json report;
  bool converged = false;
  if (method == "state" || method == "state-gaussian") {
    if (type != DatasetType::state) {
      throw SchemaError("estimate: method '" + method +
                        "' needs a state dataset");
    }
    const StateDataset ds = state_dataset_from_json(data);
    if (method == "state") {
      const MleReport r = estimate_state(ds, opts);
      report = state_report_to_json(r);
      converged = r.converged;
    } else {
      const double n_samples =
          n_samples_override > 0.0 ? n_samples_override : ds.record.total;
      const MleReport r = estimate_state_gaussian(ds, n_samples);
      report = state_report_to_json(r);
      converged = r.converged;
    }
  } else if (method == "process" || method == "process-trace-only") {
    if (type != DatasetType::process) {
      throw SchemaError("estimate: method '" + method +
                        "' needs a process dataset");
    }
    const ProcessDataset ds = process_dataset_from_json(data);
    const ProcessMleReport r = method == "process"
                                   ? estimate_process(ds, opts)
                                   : estimate_process_trace_only(ds, opts);
    report = process_report_to_json(r);
    converged = r.converged;
  } else if (method == "joint" || method == "joint-sequential") {
    if (type != DatasetType::joint) {
      throw SchemaError("estimate: method '" + method +
                        "' needs a joint dataset");
    }
    const JointDataset ds = joint_dataset_from_json(data);
    const JointReport r = method == "joint" ? estimate_joint(ds, opts)
                                            : sequential_baseline(ds, opts);
    report = joint_report_to_json(r);
    converged = r.converged;
  } else {
    throw SchemaError("estimate: unknown method '" + method + "'");
  }

  report["method"] = method;
  write_text_file(out_dir + "/report.json", dump_json(report));
  std::cout << "wrote " << out_dir << "/report.json\n";
  if (!converged) {
    std::cerr << "estimate: iteration limit reached before convergence\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int cmd_experiment(const CommonArgs& args, const std::string& name) {
  ExperimentConfig config = load_config(args);
  if (!name.empty()) {
    config.experiment = name;
  }
  ensure_out_dir(args.out_dir);
  const auto files = run_experiment_to_dir(
      config, args.out_dir,
      [](const std::string& line) { std::cerr << line << '\n'; });
  for (const auto& f : files) {
    std::cout << "wrote " << args.out_dir << "/" << f << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Maximum-likelihood reconstruction of quantum states and processes"};
  app.require_subcommand(1);

  CommonArgs sim_args;
  std::string sim_kind = "joint";
  CLI::App* simulate =
      app.add_subcommand("simulate", "Sample a measurement dataset");
  simulate->add_option("--config", sim_args.config_path,
                       "Experiment configuration JSON");
  simulate->add_option("--kind", sim_kind,
                       "Dataset kind: state, process or joint");
  simulate->add_option("--seed", sim_args.seed, "Master RNG seed");
  simulate->add_flag("--exact-frequencies", sim_args.exact_frequencies,
                     "Record expected counts instead of sampling");
  simulate->add_option("--out", sim_args.out_dir, "Output directory");

  std::string est_data;
  std::string est_method = "auto";
  std::string est_out = ".";
  MleOptions est_opts;
  double est_n_samples = 0.0;
  CLI::App* estimate =
      app.add_subcommand("estimate", "Reconstruct from a dataset file");
  estimate->add_option("--data", est_data, "Dataset JSON produced by simulate")
      ->required();
  estimate->add_option(
      "--method", est_method,
      "auto, state, state-gaussian, process, process-trace-only, joint or "
      "joint-sequential");
  estimate->add_option("--max-iters", est_opts.max_iters, "Iteration cap");
  estimate->add_option("--tol-loglike", est_opts.tol_loglike,
                       "Log-likelihood gain tolerance");
  estimate->add_option("--tol-fixedpoint", est_opts.tol_fixedpoint,
                       "Iterate movement tolerance");
  estimate->add_option("--damping", est_opts.damping,
                       "Fixed damping in [0, 1)");
  estimate->add_option("--n-samples", est_n_samples,
                       "Sample count for the Gaussian objective "
                       "(default: record total)");
  estimate->add_option("--out", est_out, "Output directory");

  CommonArgs exp_args;
  std::string exp_name;
  CLI::App* experiment =
      app.add_subcommand("experiment", "Run a simulation study");
  experiment->add_option("--config", exp_args.config_path,
                         "Experiment configuration JSON");
  experiment->add_option(
      "--name", exp_name,
      "elements, likelihood-comparison or variance-comparison "
      "(overrides the config)");
  experiment->add_option("--seed", exp_args.seed, "Master RNG seed");
  experiment->add_option("--trials", exp_args.trials, "Trial count");
  experiment->add_flag("--exact-frequencies", exp_args.exact_frequencies,
                       "Use expected counts instead of sampling");
  experiment->add_option("--out", exp_args.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
    if (simulate->parsed()) {
      return cmd_simulate(sim_args, sim_kind);
    }
    if (estimate->parsed()) {
      return cmd_estimate(est_data, est_method, est_out, est_opts,
                          est_n_samples);
    }
    return cmd_experiment(exp_args, exp_name);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const qtomo::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
