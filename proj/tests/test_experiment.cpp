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

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "swfqi/errors.hpp"
#include "swfqi/experiment.hpp"
#include "swfqi/run_io.hpp"

using namespace swfqi;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json smoke_doc() {
  return json::parse(R"({
    "schema": "swfqi.experiment", "version": 1, "name": "smoke",
    "garnet": {"n_states": 5, "n_actions": 2, "branching": 2, "reward_std": 0.1, "discount": 0.9},
    "tau_target": 0.1,
    "weighting": {"kind": "stationary_exact"},
    "features": {"kind": "realizable", "p": 3, "orthonormalize": "mu_star"},
    "mode": {"kind": "population"},
    "iters": 20,
    "seeds": [1, 2, 3],
    "init": {"kind": "zero"},
    "ridge": 0
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("swfqi_experiment_test_" + name);
  fs::remove_all(p);
  return p;
}

SeedRun fake_run(std::uint64_t seed, std::vector<double> errors, bool ok = true) {
  SeedRun r;
  r.seed = seed;
  r.ok = ok;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    FqiIterate row;
    row.k = static_cast<long>(k);
    row.error_sq = errors[k];
    row.error_mu_star = std::sqrt(errors[k]);
    r.record.rows.push_back(row);
  }
  return r;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = ExperimentConfig::from_json(smoke_doc());
  CHECK(c.name == "smoke");
  CHECK(c.garnet.n_states == 5);
  CHECK(c.weighting.kind == WeightingKind::kStationaryExact);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.total_iterations() == 20);
  CHECK_FALSE(c.homotopy.has_value());

  const auto again = ExperimentConfig::from_json(c.to_json());
  CHECK(again.to_json() == c.to_json());

  auto range = smoke_doc();
  range["seeds"] = {{"first", 10}, {"count", 4}};
  CHECK(ExperimentConfig::from_json(range).seeds == std::vector<std::uint64_t>{10, 11, 12, 13});

  auto homotopy = smoke_doc();
  homotopy["homotopy"] = {{"tau_init", 1.0}, {"stages", 3}, {"iters_per_stage", 4}, {"hold_iters", 2}};
  const auto h = ExperimentConfig::from_json(homotopy);
  REQUIRE(h.homotopy.has_value());
  CHECK(h.homotopy->tau_target == 0.1);
  CHECK(h.total_iterations() == 14);
}

TEST_CASE("config errors name the field") {
  auto expect_error = [](json doc, const std::string& fragment) {
    try {
      ExperimentConfig::from_json(doc);
      FAIL("expected ConfigError mentioning " << fragment);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  auto d = smoke_doc();
  d["colour"] = "red";
  expect_error(d, "colour");
  d = smoke_doc();
  d["weighting"]["kind"] = "magic";
  expect_error(d, "weighting.kind");
  d = smoke_doc();
  d["seeds"] = json::array();
  expect_error(d, "seeds");
  d = smoke_doc();
  d["garnet"]["branching"] = 9;
  expect_error(d, "branching");
  d = smoke_doc();
  d["iters"] = "many";
  expect_error(d, "iters");
  d = smoke_doc();
  d["features"]["p"] = 1;
  expect_error(d, "features.p");
  d = smoke_doc();
  d["schema"] = "swfqi.verify";
  expect_error(d, "swfqi.experiment");
  d = smoke_doc();
  d["name"] = "../escape";
  expect_error(d, "name");
  d = smoke_doc();
  d["homotopy"] = {{"tau_init", 0.01}, {"stages", 2}, {"iters_per_stage", 2}};
  expect_error(d, "tau_init");
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.25) == 1.75);
  CHECK(quantile_sorted(v, 0.5) == 2.5);
  CHECK(quantile_sorted(v, 0.75) == 3.25);
  CHECK(quantile_sorted(v, 0.0) == 1);
  CHECK(quantile_sorted(v, 1.0) == 4);
  CHECK(quantile_sorted({7.0}, 0.3) == 7.0);
  CHECK_THROWS(quantile_sorted({}, 0.5));
}

TEST_CASE("aggregation") {
  std::vector<SeedRun> runs{fake_run(1, {4, 2, 1}), fake_run(2, {8, 4}), fake_run(3, {}, false),
                            fake_run(4, {6, 3, 3})};
  const auto s = aggregate("arm", runs);
  CHECK(s.completed == 3);
  CHECK(s.failed == 1);
  REQUIRE(s.bands.size() == 3);
  CHECK(s.bands[0].count == 3);
  CHECK(s.bands[0].mean == 6.0);
  CHECK(s.bands[0].q25 == 5.0);
  CHECK(s.bands[0].q75 == 7.0);
  CHECK(s.bands[2].count == 2);
  CHECK(s.bands[2].k == 2);
  // Final values 1, 4, 3.
  CHECK(s.final_median == 3.0);
  CHECK(s.final_min == 1.0);
  CHECK(s.final_max == 4.0);
  for (const auto& b : s.bands) CHECK(b.q25 <= b.q75);

  std::vector<SeedRun> none{fake_run(1, {}, false)};
  CHECK_THROWS_AS(aggregate("arm", none), Error);
}

TEST_CASE("path maximum skips the shared start") {
  auto r = fake_run(1, {100, 5, 7, 2, 9, 1}).record;
  CHECK(path_max_error_sq(r) == 9.0);
  r.stage_starts = {0, 3};
  CHECK(path_max_error_sq(r) == 9.0);
  r.stage_starts = {0, 5};
  CHECK(path_max_error_sq(r) == 1.0);
  const auto single = fake_run(1, {3}).record;
  CHECK(path_max_error_sq(single) == 3.0);
}

TEST_CASE("sign test") {
  CHECK(sign_test_p_value(0, 0) == 1.0);
  CHECK(sign_test_p_value(20, 20) == doctest::Approx(2.0 * std::pow(0.5, 20)));
  CHECK(sign_test_p_value(0, 20) == sign_test_p_value(20, 20));
  CHECK(sign_test_p_value(5, 10) == 1.0);
  // P(X ≤ 1) for Bin(6, 1/2) is 7/64.
  CHECK(sign_test_p_value(1, 6) == doctest::Approx(14.0 / 64.0));
}

TEST_CASE("smoke arm runs quickly and persists artifacts") {
  auto c = ExperimentConfig::from_json(smoke_doc());
  c.output_dir = scratch("smoke").string();
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_experiment(c, 1);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 1.0);
  CHECK_FALSE(res.partial());
  CHECK(res.summary.completed == 3);
  const fs::path root = fs::path(c.output_dir) / "smoke";
  CHECK(fs::exists(root / "summary.json"));
  CHECK(fs::exists(root / "plot_data.csv"));
  for (int s : {1, 2, 3}) CHECK(fs::exists(root / "runs" / ("run_" + std::to_string(s) + ".csv")));

  const auto summary = summary_from_json(read_json_file(root / "summary.json"));
  CHECK(summary.arm == "smoke");
  REQUIRE(summary.bands.size() == res.summary.bands.size());
  for (std::size_t i = 0; i < summary.bands.size(); ++i) {
    CHECK(summary.bands[i].mean == res.summary.bands[i].mean);
    CHECK(summary.bands[i].q25 == res.summary.bands[i].q25);
  }
  CHECK(read_file(root / "plot_data.csv").rfind(std::string(kPlotCsvHeader) + "\n", 0) == 0);
  fs::remove_all(c.output_dir);
}

TEST_CASE("reruns and parallel runs are byte-identical") {
  auto c = ExperimentConfig::from_json(smoke_doc());
  c.seeds = {1, 2, 3, 4, 5, 6};
  const fs::path a = scratch("seq"), b = scratch("par"), d = scratch("rerun");
  c.output_dir = a.string();
  run_experiment(c, 1);
  c.output_dir = b.string();
  run_experiment(c, 4);
  c.output_dir = d.string();
  run_experiment(c, 1);
  for (const auto& rel : {fs::path("summary.json"), fs::path("plot_data.csv"), fs::path("runs/run_4.csv")}) {
    const auto x = read_file(a / "smoke" / rel);
    CHECK(x == read_file(b / "smoke" / rel));
    CHECK(x == read_file(d / "smoke" / rel));
  }
  fs::remove_all(a);
  fs::remove_all(b);
  fs::remove_all(d);
}

TEST_CASE("output directory override from the environment") {
  const fs::path dir = scratch("env");
  fs::create_directories(dir);
  write_file(dir / "c.json", dump_json(smoke_doc()));
  ::setenv("SWFQI_OUTPUT_DIR", "/tmp/elsewhere", 1);
  CHECK(load_experiment_config(dir / "c.json").output_dir == "/tmp/elsewhere");
  ::unsetenv("SWFQI_OUTPUT_DIR");
  CHECK(load_experiment_config(dir / "c.json").output_dir.empty());
  ::setenv("SWFQI_JOBS", "3", 1);
  CHECK(default_jobs() == 3);
  ::unsetenv("SWFQI_JOBS");
  CHECK(default_jobs() >= 1);
  fs::remove_all(dir);
}

TEST_CASE("comparing an arm with itself") {
  const auto c = ExperimentConfig::from_json(smoke_doc());
  const auto a = run_experiment(c, 1);
  const auto cmp = compare_arms(a, a, true);
  CHECK(cmp.seeds.size() == 3);
  CHECK(cmp.final_ties == 3);
  CHECK(cmp.a_final_lower == 0);
  CHECK(cmp.b_max_path_higher == 0);
  CHECK(cmp.sign_test_p == 1.0);
  CHECK(cmp.median_ratio.size() == 21);
  for (double r : cmp.median_ratio) CHECK(r == 1.0);
  const auto doc = comparison_to_json(cmp);
  CHECK(doc["schema"] == "swfqi.comparison");
}

TEST_CASE("paired comparison needs matching seeds") {
  auto c = ExperimentConfig::from_json(smoke_doc());
  const auto a = run_experiment(c, 1);
  c.seeds = {1, 2};
  const auto b = run_experiment(c, 1);
  CHECK_THROWS_AS(compare_arms(a, b, true), ConfigError);
  CHECK(compare_arms(a, b, false).seeds.size() == 2);
}

// With realizable features Q⋆ is a fixed point of both projected maps, so in
// a well-conditioned regime both arms settle at the sampling floor.
TEST_CASE("fitted runs of both weightings reach the sampling floor") {
  auto doc = smoke_doc();
  doc["garnet"] = {{"n_states", 20}, {"n_actions", 4}, {"branching", 5}, {"reward_std", 0.1}, {"discount", 0.9}};
  doc["features"]["p"] = 5;
  doc["mode"] = {{"kind", "fitted"}, {"n_transitions", 100000}};
  doc["iters"] = 100;
  doc["seeds"] = {{"first", 1}, {"count", 10}};
  const auto sw = ExperimentConfig::from_json(doc);
  doc["weighting"]["kind"] = "behavior";
  doc["name"] = "fqi";
  const auto fqi = ExperimentConfig::from_json(doc);
  const auto a = run_experiment(sw, 1), b = run_experiment(fqi, 1);
  for (const auto* r : {&a, &b}) {
    CHECK(r->summary.completed == 10);
    for (const auto& run : r->runs) {
      CHECK_FALSE(run.record.diverged);
      CHECK(run.record.rows.back().error_sq <= 1e-3 * run.record.rows.front().error_sq);
    }
  }
}
