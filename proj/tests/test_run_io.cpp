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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "swfqi/errors.hpp"
#include "swfqi/features.hpp"
#include "swfqi/run_io.hpp"
#include "test_support.hpp"

using namespace swfqi;
namespace fs = std::filesystem;

TEST_CASE("doubles print shortest and round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-6) == "1e-06");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CounterRng rng(1, Stream::kDirections);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal() * std::pow(10.0, rng.normal() * 20);
    CHECK(std::stod(format_double(x)) == x);
  }
}

TEST_CASE("run CSV round trip") {
  FqiRunRecord rec;
  for (long k = 0; k < 4; ++k) {
    FqiIterate row;
    row.k = k;
    row.tau = 0.1;
    row.error_mu_star = 1.0 / (k + 1);
    row.error_sq = row.error_mu_star * row.error_mu_star;
    if (k > 0) row.rho = 0.5 + 0.1 * k;
    if (k < 3) row.weight_err = 0.01 * k;
    row.in_basin = k >= 2;
    rec.rows.push_back(row);
  }
  std::ostringstream out;
  write_run_csv(out, "s7", rec);
  const std::string text = out.str();
  CHECK(text.rfind(std::string(kRunCsvHeader) + "\n", 0) == 0);
  CHECK(text.find("s7,0,0.1,1,,0,0\n") != std::string::npos);

  std::istringstream in(text);
  const auto rows = read_run_csv(in);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rows[i].run_id == "s7");
    CHECK(rows[i].k == rec.rows[i].k);
    CHECK(rows[i].error_sq == rec.rows[i].error_sq);
    CHECK(rows[i].rho == rec.rows[i].rho);
    CHECK(rows[i].weight_err == rec.rows[i].weight_err);
    CHECK(rows[i].in_basin == rec.rows[i].in_basin);
  }
}

TEST_CASE("malformed run CSV") {
  std::istringstream empty("");
  CHECK_THROWS_AS(read_run_csv(empty), ConfigError);
  std::istringstream header("a,b\n");
  CHECK_THROWS_AS(read_run_csv(header), ConfigError);
  std::istringstream fields(std::string(kRunCsvHeader) + "\ns1,0,0.1\n");
  CHECK_THROWS_AS(read_run_csv(fields), ConfigError);
  std::istringstream number(std::string(kRunCsvHeader) + "\ns1,0,x,1,,,0\n");
  CHECK_THROWS_AS(read_run_csv(number), ConfigError);
  std::istringstream flag(std::string(kRunCsvHeader) + "\ns1,0,0.1,1,,,2\n");
  CHECK_THROWS_AS(read_run_csv(flag), ConfigError);
}

TEST_CASE("mdp, dataset, features and tables round trip") {
  const auto mdp = test::small_garnet(6, 3, 2, 4);
  const auto back = mdp_from_json(nlohmann::json::parse(dump_json(mdp_to_json(mdp))));
  CHECK(back.reward() == mdp.reward());
  CHECK(back.discount() == mdp.discount());
  for (std::size_t i = 0; i < mdp.transitions().size(); ++i) CHECK(back.transitions()[i] == mdp.transitions()[i]);

  const auto pi = dirichlet_behavior_policy(mdp, 1);
  const auto data = sample_reset_dataset(mdp, pi, 50, 1);
  const auto data_back = dataset_from_json(nlohmann::json::parse(dump_json(dataset_to_json(data))));
  CHECK(data_back.records == data.records);
  CHECK(data_back.n_states == 6);

  const auto feats = one_hot_features(mdp);
  const auto feats_back = features_from_json(features_to_json(feats));
  CHECK(feats_back.dim() == feats.dim());
  CHECK(feats_back.id() == feats.id());
  CHECK(std::equal(feats.data().begin(), feats.data().end(), feats_back.data().begin()));

  const auto t = test::random_table(6, 3, 2);
  CHECK(table_from_json(table_to_json(t, "qtable"), "qtable") == t);
  CHECK_THROWS_AS(table_from_json(table_to_json(t, "qtable"), "policy"), ConfigError);
}

TEST_CASE("schema and version checks") {
  auto doc = mdp_to_json(test::small_garnet(3, 2, 2, 1));
  auto wrong = doc;
  wrong["schema"] = "swfqi.dataset";
  CHECK_THROWS_AS(mdp_from_json(wrong), ConfigError);
  auto future = doc;
  future["version"] = kFormatVersion + 1;
  CHECK_THROWS_AS(mdp_from_json(future), ConfigError);
  auto truncated = doc;
  truncated["transition"] = nlohmann::json::array({1.0});
  CHECK_THROWS_AS(mdp_from_json(truncated), ConfigError);
}

TEST_CASE("invalid MDP documents load unchecked") {
  auto doc = mdp_to_json(test::small_garnet(3, 2, 2, 1));
  doc["transition"][0] = 5.0;
  CHECK_THROWS(mdp_from_json(doc));
  const auto loose = mdp_from_json(doc, false);
  CHECK_FALSE(loose.violations().empty());
}

TEST_CASE("atomic file writes") {
  const fs::path dir = fs::temp_directory_path() / "swfqi_run_io_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path p = dir / "x.json";
  write_file(p, "{\"a\": 1}\n");
  write_file(p, "{\"a\": 2}\n");
  CHECK(read_file(p) == "{\"a\": 2}\n");
  CHECK(read_json_file(p)["a"] == 2);
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(read_file(dir / "missing.json"), ConfigError);
  write_file(p, "{not json");
  CHECK_THROWS_AS(read_json_file(p), ConfigError);
  fs::remove_all(dir);
}
