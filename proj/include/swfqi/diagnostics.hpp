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
#include <cstdint>
#include <vector>

#include "swfqi/features.hpp"
#include "swfqi/geometry.hpp"
#include "swfqi/mdp.hpp"
#include "swfqi/soft_bellman.hpp"

namespace swfqi {

/// Below this temperature finite differences of T are not trusted.
inline constexpr double kDerivativeTauFloor = 0.01;

/// Random table with i.i.d. standard normal entries rescaled to unit
/// ‖·‖_{2,measure}.
SaTable random_unit_direction(std::size_t n_states, std::size_t n_actions,
                              const StateActionMeasure& measure, CounterRng& rng);

/// Worst relative error, in ‖·‖_{2,measure}, between DT(Q)[h] and the central
/// difference (T(Q+εh) − T(Q−εh))/2ε over random unit directions h. Where the
/// analytic side vanishes the absolute error is reported instead. The step
/// actually used is ε·min(1, τ).
/// Throws InvalidSpec for τ below kDerivativeTauFloor.
double check_first_derivative(const TabularMdp& mdp, const QTable& q, Temperature tau,
                              const StateActionMeasure& measure, std::size_t n_directions,
                              double eps = 1e-5, std::uint64_t seed = 0);

/// Same for D²T(Q)[h1,h2] against the four-point mixed central difference.
double check_second_derivative(const TabularMdp& mdp, const QTable& q, Temperature tau,
                               const StateActionMeasure& measure, std::size_t n_directions,
                               double eps = 1e-3, std::uint64_t seed = 0);

struct ContractionCertificate {
  double radius_tested = 0.0;
  std::size_t pairs_tested = 0;
  /// max ‖TQ1 − TQ2‖/‖Q1 − Q2‖ over sampled pairs, ‖·‖_{2,μ⋆}
  double max_observed_ratio = 0.0;
  /// the same for Π_F T
  double max_projected_ratio = 0.0;
  /// ρ(radius) = γ + β_loc·radius^α
  double bound_rho = 0.0;
  std::size_t violations = 0;
  std::size_t projected_violations = 0;
  double slack = 1e-9;
  double r0 = 0.0;
  /// ‖Π_F Q⋆ − Q⋆‖_{2,μ⋆}
  double misspecification = 0.0;
};

/// Samples pairs Q1 ≠ Q2 in F ∩ ball(radius, Q⋆): Q = Π_F Q⋆ + t·u with u a
/// random unit direction in F and ‖Q − Q⋆‖ log-uniform in [1e-3·radius,
/// radius]. Throws OutOfRegion if radius ≥ r0 or the ball misses F.
ContractionCertificate certify_contraction(const TabularMdp& mdp, Temperature tau,
                                           const QTable& q_star, const FeatureMap& features,
                                           const StateActionMeasure& mu_star, double radius,
                                           std::size_t n_pairs, std::uint64_t seed);

struct RemainderReport {
  /// max over samples of lhs − rhs
  double worst_slack = 0.0;
  /// max over samples of lhs/‖Q − Q⋆‖²
  double max_quadratic_ratio = 0.0;
  double beta_loc = 0.0;
  std::size_t samples = 0;
};

/// lhs = ‖T(Q) − T^eval_{Q⋆}(Q)‖_{2,μ⋆}, rhs = (β_loc/2)·‖Q − Q⋆‖²_{2,μ⋆}
/// over Q = Q⋆ + r·u, u a random unit direction, r log-uniform in
/// [1e-3·max_radius, max_radius].
RemainderReport check_remainder_bound(const TabularMdp& mdp, Temperature tau,
                                      const QTable& q_star, const StateActionMeasure& mu_star,
                                      std::size_t n_samples, double max_radius,
                                      std::uint64_t seed = 0);

/// Temperature used as the hardmax proxy.
inline constexpr double kHardmaxTau = 1e-9;

struct GapReport {
  /// min over states of (best − second best)/2; +∞ with one action, 0 on ties.
  double delta = 0.0;
  std::vector<std::size_t> argmax_actions;
  /// best − second best per state (empty with one action)
  std::vector<double> margins;
  double margin_min = 0.0;
  double margin_median = 0.0;
  double margin_max = 0.0;
  /// states whose margin is within tol
  std::vector<std::size_t> ties;
};

GapReport measure_action_gap(const TabularMdp& mdp, double tol = 1e-9);

/// Located fixed point of Π_F T under a fixed weight measure.
struct ProjectedFixedPoint {
  LinearQ theta;
  /// ‖Π_F T(Q) − Q‖_{2,measure} at the returned point
  double residual = 0.0;
  long iterations = 0;
};

/// Picard iteration of Π_F T from q0. This only finds the point when the
/// iteration contracts there; check the returned residual.
ProjectedFixedPoint locate_projected_fixed_point(const TabularMdp& mdp, Temperature tau,
                                                 const FeatureMap& features,
                                                 const StateActionMeasure& measure,
                                                 const LinearQ& q0, double tol, long max_iter);

}  // namespace swfqi
