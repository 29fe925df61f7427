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

#include <span>
#include <vector>

#include "swfqi/mdp.hpp"
#include "swfqi/tables.hpp"

namespace swfqi {

/// Softmax temperature; strictly positive.
class Temperature {
 public:
  explicit Temperature(double tau);
  double value() const { return tau_; }

 private:
  double tau_;
};

struct SoftSolveReport {
  QTable q_star;
  long iterations = 0;
  /// ‖T Q − Q‖_∞ at the returned Q.
  double final_residual = 0.0;
};

/// π_Q(a|s) ∝ exp(Q(s,a)/τ), max-shifted per row.
TabularPolicy softmax_policy(const QTable& q, Temperature tau);

/// max(v) + τ·log Σ exp((v − max v)/τ).
double logsumexp_backup(std::span<const double> v, Temperature tau);

/// Soft state values V(s) = logsumexp_backup(Q(s,·), τ).
std::vector<double> soft_state_values(const QTable& q, Temperature tau);

/// (T Q)(s,a) = r0(s,a) + γ Σ_{s'} P(s'|s,a) V(s').
QTable soft_bellman_apply(const TabularMdp& mdp, const QTable& q, Temperature tau);

/// (P^eval_π f)(s,a) = Σ_{s'} P(s'|s,a) Σ_{a'} π(a'|s') f(s',a').
QTable soft_eval_apply(const TabularMdp& mdp, const TabularPolicy& policy, const SaTable& f);

/// γ Σ_{s'} P(s'|s,a) τ H(π_Q(·|s')), natural-log entropy.
QTable entropy_bonus(const TabularMdp& mdp, const QTable& q, Temperature tau);

/// T^eval_Q f = r0 + entropy_bonus(Q) + γ P^eval_{π_Q} f. Satisfies
/// T^eval_Q(Q) = T(Q).
QTable soft_eval_operator(const TabularMdp& mdp, const QTable& q_ref, Temperature tau,
                          const QTable& f);

/// Soft value iteration from Q = 0. Stops once the sup-norm step is at most
/// tol·(1−γ)/γ, which bounds ‖Q − Q⋆‖_∞ by tol. Throws NonConvergence when
/// max_iter updates are not enough.
SoftSolveReport solve_soft_q_star(const TabularMdp& mdp, Temperature tau, double tol,
                                  long max_iter = 1'000'000);

/// Fréchet derivative DT(Q)[h] = γ P^eval_{π_Q} h.
QTable dT_apply(const TabularMdp& mdp, const QTable& q, Temperature tau, const SaTable& h);

/// Second derivative D²T(Q)[h1,h2](s,a) =
/// γ Σ_{s'} P(s'|s,a) (1/τ) Cov_{π_Q(·|s')}(h1(s',·), h2(s',·)).
QTable d2T_apply(const TabularMdp& mdp, const QTable& q, Temperature tau, const SaTable& h1,
                 const SaTable& h2);

/// T(Q_ref + Δ) − T(Q_ref) without forming either side, so the result keeps
/// full relative accuracy when Δ is far below the magnitude of Q_ref.
QTable soft_bellman_difference(const TabularMdp& mdp, const QTable& q_ref, Temperature tau,
                               const SaTable& delta);

/// T(Q_ref + Δ) − T^eval_{Q_ref}(Q_ref + Δ), the nonlinear remainder of the
/// linearization at Q_ref, evaluated in the same cancellation-free form:
/// γ Σ P(s'|s,a) [τ log Σ_a π_ref(a|s') e^{Δ(s',a)/τ} − Σ_a π_ref(a|s') Δ(s',a)].
QTable linearization_remainder(const TabularMdp& mdp, const QTable& q_ref, Temperature tau,
                               const SaTable& delta);

}  // namespace swfqi
