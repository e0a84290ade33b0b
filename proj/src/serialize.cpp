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

#include "qtomo/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>

namespace qtomo {
namespace {

const Json& require_key(const Json& j, const char* key, const char* where) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(std::string(where) + ": missing key '" + key + "'");
  }
  return j.at(key);
}

double require_number(const Json& j, const char* where) {
  if (!j.is_number()) {
    throw SchemaError(std::string(where) + ": expected a number");
  }
  return j.get<double>();
}

std::string require_string(const Json& j, const char* where) {
  if (!j.is_string()) {
    throw SchemaError(std::string(where) + ": expected a string");
  }
  return j.get<std::string>();
}

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j, const char* where) {
  if (!j.is_array() || j.size() != 2) {
    throw SchemaError(std::string(where) +
                      ": complex entries must be [re, im]");
  }
  return Complex(require_number(j[0], where), require_number(j[1], where));
}

}  // namespace

Json operator_to_json(const Operator& op) {
  Json spaces = Json::array();
  for (const auto& s : op.spaces()) {
    spaces.push_back({{"name", s.name}, {"dim", s.dim}});
  }
  Json entries = Json::array();
  for (Eigen::Index r = 0; r < op.dim(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < op.dim(); ++c) {
      row.push_back(complex_to_json(op.mat()(r, c)));
    }
    entries.push_back(std::move(row));
  }
  return Json{{"spaces", std::move(spaces)}, {"entries", std::move(entries)}};
}

Operator operator_from_json(const Json& j) {
  const Json& spaces_j = require_key(j, "spaces", "operator");
  if (!spaces_j.is_array() || spaces_j.empty()) {
    throw SchemaError("operator: 'spaces' must be a nonempty array");
  }
  std::vector<SpaceLabel> spaces;
  Eigen::Index dim = 1;
  for (const auto& s : spaces_j) {
    SpaceLabel label;
    label.name = require_string(require_key(s, "name", "operator space"),
                                "operator space name");
    const double d = require_number(require_key(s, "dim", "operator space"),
                                    "operator space dim");
    label.dim = static_cast<Eigen::Index>(d);
    if (label.dim <= 0 || static_cast<double>(label.dim) != d) {
      throw SchemaError("operator: space dimension must be a positive "
                        "integer");
    }
    dim *= label.dim;
    spaces.push_back(std::move(label));
  }
  const Json& entries = require_key(j, "entries", "operator");
  if (!entries.is_array() || static_cast<Eigen::Index>(entries.size()) != dim) {
    throw SchemaError("operator: 'entries' must have one row per dimension");
  }
  Mat m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Json& row = entries[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw SchemaError("operator: ragged entry rows");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)],
                                  "operator entry");
    }
  }
  try {
    return Operator(std::move(spaces), std::move(m));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("operator: ") + e.what());
  }
}

Json povm_to_json(const Povm& povm) {
  Json elements = Json::array();
  for (const auto& e : povm.elements()) {
    elements.push_back(operator_to_json(e));
  }
  return elements;
}

Povm povm_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) {
    throw SchemaError("povm: expected a nonempty array of operators");
  }
  std::vector<Operator> elements;
  for (const auto& e : j) elements.push_back(operator_from_json(e));
  try {
    return Povm(std::move(elements));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("povm: ") + e.what());
  }
}

Json record_to_json(const CountRecord& rec) {
  return Json{{"setting", rec.setting},
              {"counts", rec.counts},
              {"total", rec.total}};
}

CountRecord record_from_json(const Json& j) {
  CountRecord rec;
  rec.setting = require_string(require_key(j, "setting", "count record"),
                               "count record setting");
  const Json& counts = require_key(j, "counts", "count record");
  if (!counts.is_array() || counts.empty()) {
    throw SchemaError("count record: 'counts' must be a nonempty array");
  }
  for (const auto& c : counts) {
    rec.counts.push_back(require_number(c, "count record count"));
  }
  rec.total = require_number(require_key(j, "total", "count record"),
                             "count record total");
  try {
    rec.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("count record: ") + e.what());
  }
  return rec;
}

DatasetType dataset_type(const Json& j) {
  const std::string type =
      require_string(require_key(j, "type", "dataset"), "dataset type");
  if (type == "state") return DatasetType::state;
  if (type == "process") return DatasetType::process;
  if (type == "joint") return DatasetType::joint;
  throw SchemaError("dataset: unknown type '" + type + "'");
}

Json state_dataset_to_json(const StateDataset& ds) {
  return Json{{"type", "state"},
              {"povm", povm_to_json(ds.povm)},
              {"record", record_to_json(ds.record)}};
}

StateDataset state_dataset_from_json(const Json& j) {
  if (dataset_type(j) != DatasetType::state) {
    throw SchemaError("state dataset: type tag is not 'state'");
  }
  try {
    return StateDataset(povm_from_json(require_key(j, "povm", "state dataset")),
                        record_from_json(require_key(j, "record",
                                                     "state dataset")));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("state dataset: ") + e.what());
  }
}

Json process_dataset_to_json(const ProcessDataset& ds) {
  Json probes = Json::array();
  for (const auto& p : ds.probes()) {
    probes.push_back(
        Json{{"kind", p.kind == ProbeSpec::Kind::separable ? "separable"
                                                           : "entangled"},
             {"state", operator_to_json(p.state.op())}});
  }
  Json povms = Json::array();
  for (const auto& p : ds.povms()) povms.push_back(povm_to_json(p));
  Json records = Json::array();
  for (const auto& r : ds.records()) records.push_back(record_to_json(r));
  return Json{{"type", "process"},
              {"probes", std::move(probes)},
              {"povms", std::move(povms)},
              {"records", std::move(records)}};
}

ProcessDataset process_dataset_from_json(const Json& j) {
  if (dataset_type(j) != DatasetType::process) {
    throw SchemaError("process dataset: type tag is not 'process'");
  }
  const Json& probes_j = require_key(j, "probes", "process dataset");
  const Json& povms_j = require_key(j, "povms", "process dataset");
  const Json& records_j = require_key(j, "records", "process dataset");
  if (!probes_j.is_array() || !povms_j.is_array() || !records_j.is_array()) {
    throw SchemaError("process dataset: probes/povms/records must be arrays");
  }
  std::vector<ProbeSpec> probes;
  for (const auto& p : probes_j) {
    const std::string kind =
        require_string(require_key(p, "kind", "probe"), "probe kind");
    Operator state = operator_from_json(require_key(p, "state", "probe"));
    try {
      DensityMatrix rho(state);
      if (kind == "separable") {
        probes.push_back(ProbeSpec::separable(std::move(rho)));
      } else if (kind == "entangled") {
        probes.push_back(ProbeSpec::entangled(std::move(rho)));
      } else {
        throw SchemaError("probe: unknown kind '" + kind + "'");
      }
    } catch (const std::invalid_argument& e) {
      throw SchemaError(std::string("probe state: ") + e.what());
    }
  }
  std::vector<Povm> povms;
  for (const auto& p : povms_j) povms.push_back(povm_from_json(p));
  std::vector<CountRecord> records;
  for (const auto& r : records_j) records.push_back(record_from_json(r));
  try {
    return ProcessDataset(std::move(probes), std::move(povms),
                          std::move(records));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("process dataset: ") + e.what());
  }
}

Json joint_dataset_to_json(const JointDataset& ds) {
  Json probes = Json::array();
  for (std::size_t m = 0; m < ds.n_probes(); ++m) {
    const auto& p = ds.probe(m);
    probes.push_back(Json{{"input_povm", povm_to_json(p.input_povm)},
                          {"input_record", record_to_json(p.input_record)},
                          {"output_povm", povm_to_json(p.output_povm)},
                          {"output_record", record_to_json(p.output_record)}});
  }
  return Json{{"type", "joint"}, {"probes", std::move(probes)}};
}

JointDataset joint_dataset_from_json(const Json& j) {
  if (dataset_type(j) != DatasetType::joint) {
    throw SchemaError("joint dataset: type tag is not 'joint'");
  }
  const Json& probes_j = require_key(j, "probes", "joint dataset");
  if (!probes_j.is_array() || probes_j.empty()) {
    throw SchemaError("joint dataset: 'probes' must be a nonempty array");
  }
  std::vector<JointProbeData> probes;
  for (const auto& p : probes_j) {
    JointProbeData d;
    d.input_povm = povm_from_json(require_key(p, "input_povm", "joint probe"));
    d.input_record =
        record_from_json(require_key(p, "input_record", "joint probe"));
    d.output_povm =
        povm_from_json(require_key(p, "output_povm", "joint probe"));
    d.output_record =
        record_from_json(require_key(p, "output_record", "joint probe"));
    probes.push_back(std::move(d));
  }
  try {
    return JointDataset(std::move(probes));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("joint dataset: ") + e.what());
  }
}

Json channel_to_json(const ChannelSpec& spec) {
  switch (spec.kind) {
    case ChannelSpec::Kind::identity:
      return Json{{"kind", "identity"}};
    case ChannelSpec::Kind::depolarizing:
      return Json{{"kind", "depolarizing"}};
    case ChannelSpec::Kind::rotation:
      return Json{{"kind", "rotation"}, {"theta", spec.theta}};
    case ChannelSpec::Kind::mixture:
      if (!spec.a || !spec.b) {
        throw SchemaError("channel: mixture missing a branch");
      }
      return Json{{"kind", "mixture"},
                  {"weight", spec.weight},
                  {"a", channel_to_json(*spec.a)},
                  {"b", channel_to_json(*spec.b)}};
  }
  throw SchemaError("channel: invalid kind");
}

ChannelSpec channel_from_json(const Json& j) {
  const std::string kind =
      require_string(require_key(j, "kind", "channel"), "channel kind");
  if (kind == "identity") return ChannelSpec::identity_channel();
  if (kind == "depolarizing") return ChannelSpec::depolarizing();
  if (kind == "rotation") {
    return ChannelSpec::rotation(
        require_number(require_key(j, "theta", "channel"), "channel theta"));
  }
  if (kind == "mixture") {
    const double weight = require_number(
        require_key(j, "weight", "channel"), "channel weight");
    if (weight < 0.0 || weight > 1.0) {
      throw SchemaError("channel: mixture weight outside [0, 1]");
    }
    return ChannelSpec::mixture(
        weight, channel_from_json(require_key(j, "a", "channel")),
        channel_from_json(require_key(j, "b", "channel")));
  }
  throw SchemaError("channel: unknown kind '" + kind + "'");
}

Json axes_to_json(const std::vector<Axis>& axes) {
  Json out = Json::array();
  for (Axis a : axes) out.push_back(axis_name(a));
  return out;
}

std::vector<Axis> axes_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) {
    throw SchemaError("axes: expected a nonempty array");
  }
  std::vector<Axis> out;
  for (const auto& a : j) {
    try {
      out.push_back(axis_from_name(require_string(a, "axis")));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  }
  return out;
}

Json state_report_to_json(const MleReport& report) {
  return Json{{"estimate", operator_to_json(report.estimate.op())},
              {"loglike", report.loglike},
              {"iterations", report.iterations},
              {"converged", report.converged},
              {"loglike_trace", report.loglike_trace}};
}

Json process_report_to_json(const ProcessMleReport& report) {
  return Json{{"estimate", operator_to_json(report.estimate.op())},
              {"loglike", report.loglike},
              {"iterations", report.iterations},
              {"converged", report.converged},
              {"tp_residual", report.tp_residual},
              {"loglike_trace", report.loglike_trace}};
}

Json joint_report_to_json(const JointReport& report) {
  Json probes = Json::array();
  for (const auto& p : report.probe_estimates) {
    probes.push_back(operator_to_json(p.op()));
  }
  return Json{{"probe_estimates", std::move(probes)},
              {"process_estimate",
               operator_to_json(report.process_estimate.op())},
              {"loglike", report.loglike},
              {"iterations", report.iterations},
              {"converged", report.converged},
              {"input_span_deficient", report.input_span_deficient},
              {"loglike_trace", report.loglike_trace}};
}

Json comparison_report_to_json(const ComparisonReport& report) {
  return Json{{"var_exact", report.var_exact},
              {"var_approx", report.var_approx},
              {"trials", report.trials},
              {"sq_errors_exact", report.sq_errors_exact},
              {"sq_errors_approx", report.sq_errors_approx}};
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw SchemaError("cannot open '" + path + "'");
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("cannot parse '" + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw std::runtime_error("failed writing '" + path + "'");
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace qtomo
