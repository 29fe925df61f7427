// Copyright 2026 The swfqi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "swfqi/features.hpp"
#include "swfqi/fqi.hpp"
#include "swfqi/mdp.hpp"
#include "swfqi/tables.hpp"

namespace swfqi {

/// Shortest decimal string that parses back to the same double.
/// Non-finite values print as "nan", "inf" or "-inf".
std::string format_double(double x);

inline constexpr const char* kRunCsvHeader = "run_id,k,tau,error_sq,rho_k,weight_err,in_basin";

/// One CSV row per iterate; absent optionals are empty fields.
void write_run_csv(std::ostream& out, const std::string& run_id, const FqiRunRecord& record);

struct RunCsvRow {
  std::string run_id;
  long k = 0;
  double tau = 0.0;
  double error_sq = 0.0;
  std::optional<double> rho;
  std::optional<double> weight_err;
  bool in_basin = false;
};

/// Throws ConfigError on a wrong header or malformed row.
std::vector<RunCsvRow> read_run_csv(std::istream& in);

/// Writes `text` to `path` through a temporary file in the same directory.
void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
std::string dump_json(const nlohmann::json& doc);

// Versioned documents. Every array is flat and row-major.
inline constexpr int kFormatVersion = 1;

nlohmann::json mdp_to_json(const TabularMdp& mdp);
/// Validated unless `checked` is false, in which case problems are left for
/// TabularMdp::violations to report.
TabularMdp mdp_from_json(const nlohmann::json& doc, bool checked = true);

nlohmann::json dataset_to_json(const TransitionDataset& data);
TransitionDataset dataset_from_json(const nlohmann::json& doc);

nlohmann::json features_to_json(const FeatureMap& features);
FeatureMap features_from_json(const nlohmann::json& doc);

/// `kind` names the table ("qtable", "policy", "measure").
nlohmann::json table_to_json(const SaTable& table, const std::string& kind);
SaTable table_from_json(const nlohmann::json& doc, const std::string& kind);

/// Throws ConfigError unless doc.schema == schema and doc.version is supported.
void require_schema(const nlohmann::json& doc, const std::string& schema);

}  // namespace swfqi
