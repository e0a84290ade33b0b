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

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qtomo/approx_methods.hpp"

namespace qtomo {

/// Insertion-ordered JSON so serialized files are byte-stable.
using Json = nlohmann::ordered_json;

/// Malformed or type-mismatched input document.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Complex numbers serialize as [re, im]; operators as
// {"spaces": [{"name", "dim"}...], "entries": [[[re, im], ...], ...]}
// (row-major); count records as {"setting", "counts", "total"}.

Json operator_to_json(const Operator& op);
Operator operator_from_json(const Json& j);

Json povm_to_json(const Povm& povm);
Povm povm_from_json(const Json& j);

Json record_to_json(const CountRecord& rec);
CountRecord record_from_json(const Json& j);

// Datasets carry a "type" tag: "state", "process" or "joint".
enum class DatasetType { state, process, joint };
DatasetType dataset_type(const Json& j);

Json state_dataset_to_json(const StateDataset& ds);
StateDataset state_dataset_from_json(const Json& j);

Json process_dataset_to_json(const ProcessDataset& ds);
ProcessDataset process_dataset_from_json(const Json& j);

Json joint_dataset_to_json(const JointDataset& ds);
JointDataset joint_dataset_from_json(const Json& j);

Json channel_to_json(const ChannelSpec& spec);
ChannelSpec channel_from_json(const Json& j);

Json axes_to_json(const std::vector<Axis>& axes);
std::vector<Axis> axes_from_json(const Json& j);

Json state_report_to_json(const MleReport& report);
Json process_report_to_json(const ProcessMleReport& report);
Json joint_report_to_json(const JointReport& report);
Json comparison_report_to_json(const ComparisonReport& report);

/// Canonical text form: two-space indentation plus trailing newline.
std::string dump_json(const Json& j);

/// Parse a JSON file; throws SchemaError on unreadable or invalid input.
Json parse_json_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Format a double for CSV output: shortest representation that parses
/// back to the same value.
std::string csv_double(double v);

}  // namespace qtomo
