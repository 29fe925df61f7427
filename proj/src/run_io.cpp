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

#include "swfqi/run_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "swfqi/errors.hpp"

namespace swfqi {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_run_csv(std::ostream& out, const std::string& run_id, const FqiRunRecord& record) {
  out << kRunCsvHeader << '\n';
  for (const auto& row : record.rows) {
    out << run_id << ',' << row.k << ',' << format_double(row.tau) << ','
        << format_double(row.error_sq) << ',';
    if (row.rho) out << format_double(*row.rho);
    out << ',';
    if (row.weight_err) out << format_double(*row.weight_err);
    out << ',' << (row.in_basin ? 1 : 0) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("run CSV line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, std::size_t line_no) {
  long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("run CSV line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

std::optional<double> parse_optional(const std::string& s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, line_no);
}

template <typename T>
std::vector<T> read_array(const json& doc, const char* key, std::size_t expected) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw ConfigError(std::string("missing array '") + key + "'");
  }
  auto v = doc.at(key).get<std::vector<T>>();
  if (v.size() != expected) {
    throw ConfigError(std::string("array '") + key + "' has " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(expected));
  }
  return v;
}

std::size_t read_size(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_number_unsigned()) {
    throw ConfigError(std::string("missing nonnegative integer '") + key + "'");
  }
  return doc.at(key).get<std::size_t>();
}

}  // namespace

std::vector<RunCsvRow> read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("run CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunCsvHeader) throw ConfigError("run CSV header mismatch: '" + line + "'");
  std::vector<RunCsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) throw ConfigError("run CSV line " + std::to_string(line_no) + ": need 7 fields");
    RunCsvRow row;
    row.run_id = f[0];
    row.k = parse_long(f[1], line_no);
    row.tau = parse_double(f[2], line_no);
    row.error_sq = parse_double(f[3], line_no);
    row.rho = parse_optional(f[4], line_no);
    row.weight_err = parse_optional(f[5], line_no);
    if (f[6] != "0" && f[6] != "1") {
      throw ConfigError("run CSV line " + std::to_string(line_no) + ": in_basin must be 0 or 1");
    }
    row.in_basin = f[6] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

void require_schema(const json& doc, const std::string& schema) {
  if (!doc.is_object() || !doc.contains("schema") || doc.at("schema") != schema) {
    throw ConfigError("expected a '" + schema + "' document");
  }
  if (!doc.contains("version") || !doc.at("version").is_number_integer() ||
      doc.at("version").get<int>() != kFormatVersion) {
    throw ConfigError("unsupported " + schema + " version");
  }
}

json mdp_to_json(const TabularMdp& mdp) {
  return {{"schema", "swfqi.mdp"},
          {"version", kFormatVersion},
          {"n_states", mdp.n_states()},
          {"n_actions", mdp.n_actions()},
          {"discount", mdp.discount()},
          {"reward", mdp.reward().values()},
          {"transition", std::vector<double>(mdp.transitions().begin(), mdp.transitions().end())}};
}

TabularMdp mdp_from_json(const json& doc, bool checked) {
  require_schema(doc, "swfqi.mdp");
  try {
    const std::size_t ns = read_size(doc, "n_states");
    const std::size_t na = read_size(doc, "n_actions");
    const double discount = doc.at("discount").get<double>();
    SaTable reward(ns, na, read_array<double>(doc, "reward", ns * na));
    auto p = read_array<double>(doc, "transition", ns * na * ns);
    if (checked) return TabularMdp(ns, na, std::move(p), std::move(reward), discount);
    return TabularMdp::unchecked(ns, na, std::move(p), std::move(reward), discount);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed MDP document: ") + e.what());
  }
}

json dataset_to_json(const TransitionDataset& data) {
  std::vector<double> flat;
  flat.reserve(4 * data.size());
  for (const auto& t : data.records) {
    flat.push_back(t.s);
    flat.push_back(t.a);
    flat.push_back(t.r);
    flat.push_back(t.s_next);
  }
  return {{"schema", "swfqi.dataset"},
          {"version", kFormatVersion},
          {"n_states", data.n_states},
          {"n_actions", data.n_actions},
          {"columns", {"s", "a", "r", "s_next"}},
          {"n", data.size()},
          {"records", flat}};
}

TransitionDataset dataset_from_json(const json& doc) {
  require_schema(doc, "swfqi.dataset");
  try {
    TransitionDataset data;
    data.n_states = read_size(doc, "n_states");
    data.n_actions = read_size(doc, "n_actions");
    const std::size_t n = read_size(doc, "n");
    const auto flat = read_array<double>(doc, "records", 4 * n);
    data.records.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto& t = data.records[i];
      t.s = static_cast<std::uint32_t>(flat[4 * i]);
      t.a = static_cast<std::uint32_t>(flat[4 * i + 1]);
      t.r = flat[4 * i + 2];
      t.s_next = static_cast<std::uint32_t>(flat[4 * i + 3]);
    }
    data.validate();
    return data;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed dataset document: ") + e.what());
  }
}

json features_to_json(const FeatureMap& features) {
  return {{"schema", "swfqi.features"},
          {"version", kFormatVersion},
          {"id", features.id()},
          {"n_states", features.n_states()},
          {"n_actions", features.n_actions()},
          {"dim", features.dim()},
          {"phi", std::vector<double>(features.data().begin(), features.data().end())}};
}

FeatureMap features_from_json(const json& doc) {
  require_schema(doc, "swfqi.features");
  try {
    const std::size_t ns = read_size(doc, "n_states");
    const std::size_t na = read_size(doc, "n_actions");
    const std::size_t p = read_size(doc, "dim");
    return FeatureMap(ns, na, p, read_array<double>(doc, "phi", ns * na * p),
                      doc.at("id").get<std::string>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed features document: ") + e.what());
  }
}

json table_to_json(const SaTable& table, const std::string& kind) {
  return {{"schema", "swfqi." + kind},
          {"version", kFormatVersion},
          {"n_states", table.n_states()},
          {"n_actions", table.n_actions()},
          {"values", table.values()}};
}

SaTable table_from_json(const json& doc, const std::string& kind) {
  require_schema(doc, "swfqi." + kind);
  try {
    const std::size_t ns = read_size(doc, "n_states");
    const std::size_t na = read_size(doc, "n_actions");
    return SaTable(ns, na, read_array<double>(doc, "values", ns * na));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed table document: ") + e.what());
  }
}

}  // namespace swfqi
