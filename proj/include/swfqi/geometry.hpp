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

#include <cstddef>
#include <optional>
#include <vector>

#include "swfqi/features.hpp"
#include "swfqi/mdp.hpp"
#include "swfqi/soft_bellman.hpp"
#include "swfqi/tables.hpp"

namespace swfqi {

/// Ratio of two state-action measures.
struct DensityRatio : SaTable {
  using SaTable::SaTable;
  DensityRatio() = default;
  explicit DensityRatio(SaTable t) : SaTable(std::move(t)) {}

  /// Pairs whose denominator fell below the floor (their ratio is set to 0).
  std::size_t support_violations = 0;
};

struct StationaryOptions {
  /// d in (0,1]: each step returns d·μM + (1−d)·uniform. 1 disables damping.
  double damping = 1.0;
  /// Iterate the lazy chain ½(I + M) instead of M. It has the same
  /// stationary measures and is aperiodic, so it also settles on periodic
  /// chains.
  bool lazy = false;
  /// Start point; the uniform measure when absent.
  const StateActionMeasure* warm_start = nullptr;
};

struct StationaryResult {
  StateActionMeasure measure;
  /// ‖μᵀM − μᵀ‖₁ for the returned μ (undamped M).
  double residual = 0.0;
  long iterations = 0;
  bool damped = false;
  bool lazy = false;
};

/// Power iteration for μ = μM with M[(s,a)→(s',a')] = P(s'|s,a)π(a'|s').
/// Throws NonConvergence (carrying the last residual) after max_iter steps.
StateActionMeasure stationary_distribution(const TabularMdp& mdp, const TabularPolicy& policy,
                                           double tol, long max_iter = 1'000'000);

StationaryResult stationary_solve(const TabularMdp& mdp, const TabularPolicy& policy, double tol,
                                  long max_iter, const StationaryOptions& options = {});

/// ‖μᵀM − μᵀ‖₁.
double stationarity_residual(const TabularMdp& mdp, const TabularPolicy& policy,
                             const StateActionMeasure& mu);

/// √(Σ m f²).
double weighted_l2_norm(const SaTable& f, const StateActionMeasure& measure);

/// numerator/denominator where denominator ≥ floor, 0 elsewhere.
DensityRatio density_ratio(const StateActionMeasure& numerator,
                           const StateActionMeasure& denominator, double floor = 1e-12);

/// ratio·base, renormalized.
StateActionMeasure reweight(const DensityRatio& ratio, const StateActionMeasure& base);

/// Solves (G + ridge·I)θ = b with G symmetric positive semidefinite (p×p,
/// row-major). Throws SingularSystem when G + ridge·I is numerically
/// singular (relative pivot below 1e-13).
std::vector<double> solve_normal_equations(std::vector<double> gram, std::vector<double> rhs,
                                           double ridge);

/// argmin_θ Σ m (target − φᵀθ)² + ridge‖θ‖².
LinearQ projection_weighted_ls(const SaTable& target, const FeatureMap& features,
                               const StateActionMeasure& measure, double ridge = 0.0);

/// ‖Π_F Q⋆ − Q⋆‖_{2,μ⋆} with an unregularized projection.
double misspecification_gap(const QTable& q_star, const FeatureMap& features,
                            const StateActionMeasure& mu_star);

/// Local geometry constants around the soft optimum.
struct ContractionProfile {
  double gamma = 0.0;
  double tau = 0.0;
  std::size_t n_actions = 0;
  double alpha = 1.0;
  double pi_min = 0.0;
  double c_inf = 0.0;
  double beta_loc = 0.0;
  double r0 = 0.0;
  double eps_f = 0.0;
  /// r0 − eps_f
  double r_max = 0.0;
  bool gap_enhanced = false;

  /// γ + β_loc·r^α
  double rho(double r) const;
  /// γ + β_loc·(r + ε_F)^α
  double rho_eff(double r) const;
};

/// β_loc = (γ/2τ)·C_∞·√(|A|/π_min), C_∞ = 1/√(min μ⋆), r0 = ((1−γ)/β_loc)^{1/α}.
/// Throws DegenerateSupport if μ⋆ or π⋆ vanish somewhere.
ContractionProfile contraction_profile(const TabularMdp& mdp, Temperature tau,
                                       const StateActionMeasure& mu_star,
                                       const TabularPolicy& pi_star, double eps_f = 0.0,
                                       double alpha = 1.0);

/// β^gap = (γ/τ)·C_∞·√(|A|/π_min)·C_gap·e^{−Δ/(2τ)},
/// r0^gap = min{r_gap, ((1−γ)/β^gap)^{1/α}}. Throws NoGap if Δ ≤ 0.
ContractionProfile gap_enhanced_profile(const ContractionProfile& profile, double action_gap,
                                        double c_gap, double r_gap);

}  // namespace swfqi
