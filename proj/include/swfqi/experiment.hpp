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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "swfqi/fqi.hpp"
#include "swfqi/mdp.hpp"

namespace swfqi {

struct FeatureSpec {
  enum class Kind { kRealizable, kOneHot };
  Kind kind = Kind::kRealizable;
  std::size_t p = 5;
  OrthonormalizeIn orthonormalize = OrthonormalizeIn::kMuStar;
};

struct InitSpec {
  enum class Kind { kZero, kBasin };
  Kind kind = Kind::kZero;
  /// ‖Q0 − Q⋆‖ before projection onto F (basin init only).
  double delta = 0.0;
};

/// Everything one experiment arm needs. The Garnet seed, behavior policy,
/// dataset, features and noise of run i are all keyed by seeds[i].
struct ExperimentConfig {
  std::string name = "experiment";
  GarnetSpec garnet;
  double tau_target = 1e-6;
  std::optional<HomotopySchedule> homotopy;
  WeightingMode weighting;
  FeatureSpec features;
  FitMode mode = FitMode::kPopulation;
  std::size_t n_transitions = 100000;
  long iters = 300;
  std::vector<std::uint64_t> seeds;
  InitSpec init;
  double ridge = 0.0;
  long warm_start_iters = 0;
  std::string output_dir;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Iterations actually run per seed.
  long total_iterations() const;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

/// Loads a config file and applies SWFQI_OUTPUT_DIR when set.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// SWFQI_JOBS when set and positive, else the hardware concurrency (≥ 1).
unsigned default_jobs();

/// Linear-interpolation quantile (the common "type 7" definition) of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Largest error_sq over the part of a run where the arms can differ: the
/// rows after the first homotopy stage, or every row after k = 0 for a
/// single-stage run. Both arms of a paired comparison share Q0 and, in the
/// first stage, the same starting temperature, so earlier rows say nothing
/// about stability.
double path_max_error_sq(const FqiRunRecord& rec);

struct SeedRun {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  FqiRunRecord record;
};

/// Runs one seed of an arm. Throws on failure.
FqiRunRecord run_seed(const ExperimentConfig& config, std::uint64_t seed);

struct IterationBand {
  long k = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

struct AggregateSummary {
  std::string arm;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::size_t divergences = 0;
  std::vector<IterationBand> bands;
  /// error_sq at each completed run's last row
  double final_mean = 0.0;
  double final_median = 0.0;
  double final_q25 = 0.0;
  double final_q75 = 0.0;
  double final_min = 0.0;
  double final_max = 0.0;
};

/// Reduces completed runs. Throws Error when none completed.
AggregateSummary aggregate(const std::string& arm, const std::vector<SeedRun>& runs);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRun> runs;
  AggregateSummary summary;

  bool partial() const { return summary.failed > 0; }
};

/// Runs every seed on a pool of `jobs` workers, then aggregates. Writes
/// <output_dir>/<name>/{runs/run_<seed>.csv, summary.json, plot_data.csv}
/// when output_dir is set. Seed failures are recorded and skipped; throws
/// Error when every seed failed.
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs = 1);

std::string run_id_for(std::uint64_t seed);
std::string run_csv_text(std::uint64_t seed, const FqiRunRecord& record);

nlohmann::json summary_to_json(const ExperimentResult& result);
AggregateSummary summary_from_json(const nlohmann::json& doc);

inline constexpr const char* kPlotCsvHeader = "arm,iteration,mean,q25,q75";
std::string plot_csv_text(const std::vector<AggregateSummary>& arms);

struct ArmComparison {
  std::string arm_a;
  std::string arm_b;
  std::vector<std::uint64_t> seeds;
  /// seeds where A's final error_sq is strictly below B's
  std::size_t a_final_lower = 0;
  std::size_t final_ties = 0;
  /// two-sided exact sign test on the untied seeds
  double sign_test_p = 1.0;
  /// seeds where B's path_max_error_sq strictly exceeds A's
  std::size_t b_max_path_higher = 0;
  /// median over seeds of error_sq(A)/error_sq(B) at each shared iteration
  std::vector<double> median_ratio;
  double fraction_a_final_lower() const;
  double fraction_b_max_higher() const;
};

/// Pairs runs by seed. With paired_seeds the seed sets must match exactly
/// (else ConfigError); otherwise only the shared seeds are compared.
ArmComparison compare_arms(const ExperimentResult& a, const ExperimentResult& b,
                           bool paired_seeds);
nlohmann::json comparison_to_json(const ArmComparison& cmp);

/// Two-sided exact binomial sign test of `successes` out of `n` at p = 1/2.
double sign_test_p_value(std::size_t successes, std::size_t n);

}  // namespace swfqi
