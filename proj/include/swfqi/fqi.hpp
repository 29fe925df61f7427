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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "swfqi/features.hpp"
#include "swfqi/geometry.hpp"
#include "swfqi/mdp.hpp"
#include "swfqi/soft_bellman.hpp"

namespace swfqi {

enum class WeightingKind { kBehavior, kStationaryExact, kStationaryNoisy, kFixed };

/// How regression weights are chosen at each Bellman regression step.
struct WeightingMode {
  WeightingKind kind = WeightingKind::kBehavior;
  /// Log-normal multiplicative noise on the exact ratio (noisy mode).
  double noise_scale = 0.0;
  /// Weights are recomputed every `refresh_period` iterations and held in between.
  long refresh_period = 1;
  /// Used by kFixed.
  std::optional<DensityRatio> fixed_ratio;

  static WeightingMode behavior();
  static WeightingMode stationary_exact(long refresh_period = 1);
  static WeightingMode stationary_noisy(double noise_scale, long refresh_period = 1);
  static WeightingMode fixed(DensityRatio ratio);

  void validate() const;
  std::string label() const;
};

enum class Decay { kGeometric, kLinear };

/// Temperature path τ_init → τ_target over `stages` stages (the last stage
/// runs at τ_target), warm-starting each stage from the previous iterate.
struct HomotopySchedule {
  double tau_init = 0.1;
  double tau_target = 1e-6;
  long stages = 10;
  long iters_per_stage = 30;
  /// Extra iterations at τ_target after the last stage.
  long hold_iters = 0;
  Decay decay = Decay::kGeometric;

  void validate() const;
  std::vector<double> temperatures() const;
  long total_iterations() const { return stages * iters_per_stage + hold_iters; }
};

enum class FitMode { kPopulation, kFitted };

/// One logged iterate. Row k holds Q^(k); rho is e_k / e_{k−1}.
struct FqiIterate {
  long k = 0;
  double tau = 0.0;
  long stage = 0;
  double error_mu_star = 0.0;
  double error_sq = 0.0;
  std::optional<double> rho;
  /// ‖ŵ/w − 1‖_{2,μ⋆} over pairs where the exact ratio w is positive; absent
  /// for the final row, which is not followed by a regression.
  std::optional<double> weight_err;
  bool in_basin = false;
};

struct FqiRunRecord {
  std::vector<FqiIterate> rows;
  /// Index into `rows` of the first row of each stage.
  std::vector<std::size_t> stage_starts{0};
  LinearQ final_q;
  double final_error = 0.0;
  bool diverged = false;
};

/// Soft optimum at one temperature and its stationary measure.
struct Reference {
  double tau = 0.0;
  QTable q_star;
  TabularPolicy pi_star;
  StateActionMeasure mu_star;
  /// μ⋆ needed the lazy chain (the plain chain did not settle).
  bool mu_lazy = false;
};

/// Solves Q⋆(τ) to `tol` and μ⋆ to 1e-12, falling back to the lazy chain
/// when plain power iteration does not settle.
Reference make_reference(const TabularMdp& mdp, Temperature tau, double tol = 1e-10);

/// Sufficient statistics of a transition dataset for the weighted regression:
/// per-pair counts, reward sums and successor counts.
struct FittedDesign {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  double n = 0.0;
  std::vector<double> counts;
  std::vector<double> reward_sums;
  /// counts of (pair, s') laid out pair-major, n_pairs × n_states
  std::vector<double> successor_counts;

  static FittedDesign from_dataset(const TransitionDataset& data);
};

/// Π_F T(Q) under a normalized weight measure.
LinearQ population_step(const TabularMdp& mdp, const QTable& q, Temperature tau,
                        const FeatureMap& features, const StateActionMeasure& weight_measure,
                        double ridge = 0.0);

/// One weighted regression on empirical soft Bellman targets
/// ŷ_i = R_i + γ·logsumexp_backup(Q(S'_i,·)), minimizing
/// (1/n) Σ ŵ(S_i,A_i)(ŷ_i − φᵀθ)² + ridge‖θ‖². Per-sample reference path.
LinearQ fitted_step(const TransitionDataset& data, double discount, const QTable& q,
                    Temperature tau, const FeatureMap& features, const DensityRatio& ratio,
                    double ridge = 1e-10);

/// Same objective evaluated through FittedDesign; cost independent of n.
LinearQ fitted_step(const FittedDesign& design, double discount, const QTable& q, Temperature tau,
                    const FeatureMap& features, const DensityRatio& ratio, double ridge = 1e-10);

struct FqiContext {
  const TabularMdp& mdp;
  const FeatureMap& features;
  const StateActionMeasure& nu_b;
  /// Required in fitted mode.
  const FittedDesign* design = nullptr;
};

struct WeightPerturbation {
  long at_iteration = 0;
  /// Added to the regression ratio at that iteration.
  DensityRatio delta;
};

struct FqiOptions {
  FitMode mode = FitMode::kPopulation;
  WeightingMode weighting;
  long iters = 300;
  double ridge = 0.0;
  /// Seeds the weight-noise stream.
  std::uint64_t seed = 0;
  /// Leading iterations run with behavior weights.
  long warm_start_iters = 0;
  double divergence_threshold = 1e6;
  /// Rows with e_k ≤ basin_radius are flagged in_basin. When absent the
  /// radius is r_max = r0 − ε_F of the reference in use (0 if μ⋆ or π⋆
  /// vanish somewhere, since r0 is then undefined).
  std::optional<double> basin_radius;
  double stationary_tol = 1e-12;
  std::vector<WeightPerturbation> perturbations;
};

/// Iterates the projected (population) or fitted update from q0 and logs the
/// error to ref.q_star in ‖·‖_{2,μ⋆}. A run whose error exceeds the
/// divergence threshold or stops being finite is truncated and flagged.
FqiRunRecord run_fqi(const FqiContext& ctx, const LinearQ& q0, const Reference& ref,
                     const FqiOptions& options);

/// Runs each stage of `schedule` with a freshly solved reference at the stage
/// temperature. options.iters is ignored.
FqiRunRecord run_homotopy(const FqiContext& ctx, const LinearQ& q0,
                          const HomotopySchedule& schedule, const FqiOptions& options);

struct InjectionResult {
  FqiRunRecord clean;
  FqiRunRecord perturbed;
  /// e_k(perturbed) − e_k(clean) for every row k.
  std::vector<double> excess;
};

/// Clean and once-perturbed runs of population stationary-weighted FQI.
InjectionResult inject_weight_error_once(const FqiContext& ctx, const LinearQ& q0,
                                         const Reference& ref, const FqiOptions& options,
                                         long at_iteration, const DensityRatio& perturbation);

/// r0 − ε_F for the reference and feature class, clamped at 0.
double basin_radius_for(const TabularMdp& mdp, const Reference& ref, const FeatureMap& features);

/// Π_F(Q⋆ + δ·u) with u a random direction of unit ‖·‖_{2,μ⋆}.
LinearQ basin_initialization(const Reference& ref, const FeatureMap& features, double delta,
                             std::uint64_t seed);

}  // namespace swfqi
