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

#include "swfqi/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swfqi/errors.hpp"
#include "swfqi/kernels.hpp"

namespace swfqi {

namespace {

// next = μM (undamped). Returns nothing; `state_mass` is scratch.
void stationary_step(const TabularMdp& mdp, const TabularPolicy& policy,
                     const StateActionMeasure& mu, std::vector<double>& state_mass,
                     StateActionMeasure& next) {
  std::fill(state_mass.begin(), state_mass.end(), 0.0);
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      const double w = mu(s, a);
      if (w != 0.0) kernels::axpy(w, mdp.transition_row(s, a), state_mass);
    }
  }
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto pi = policy.row(s);
    auto out = next.row(s);
    for (std::size_t a = 0; a < out.size(); ++a) out[a] = state_mass[s] * pi[a];
  }
}

}  // namespace

double stationarity_residual(const TabularMdp& mdp, const TabularPolicy& policy,
                             const StateActionMeasure& mu) {
  require_same_shape(policy, mu, "stationarity_residual");
  std::vector<double> state_mass(mdp.n_states());
  StateActionMeasure next(mdp.n_states(), mdp.n_actions());
  stationary_step(mdp, policy, mu, state_mass, next);
  return kernels::l1_distance(next.flat(), mu.flat());
}

StationaryResult stationary_solve(const TabularMdp& mdp, const TabularPolicy& policy, double tol,
                                  long max_iter, const StationaryOptions& options) {
  if (!(tol > 0.0)) throw InvalidSpec("stationary_distribution: tol must be positive");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw InvalidSpec("stationary_distribution: damping must lie in (0,1]");
  }
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions()) {
    throw DimensionError("stationary_distribution: policy shape does not match the MDP");
  }
  const bool damped = options.damping < 1.0;
  const double mix = 1.0 - options.damping;
  const double uniform = 1.0 / static_cast<double>(mdp.n_pairs());

  StateActionMeasure mu = options.warm_start ? options.warm_start->normalized_copy()
                                             : uniform_measure(mdp.n_states(), mdp.n_actions());
  StateActionMeasure next(mdp.n_states(), mdp.n_actions());
  std::vector<double> state_mass(mdp.n_states());
  double change = std::numeric_limits<double>::infinity();
  for (long it = 0; it <= max_iter; ++it) {
    stationary_step(mdp, policy, mu, state_mass, next);
    if (damped) {
      for (double& v : next.flat()) v = options.damping * v + mix * uniform;
    }
    if (options.lazy) {
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (next[i] + mu[i]);
    }
    change = kernels::l1_distance(next.flat(), mu.flat());
    // A lazy step moves half as far as the underlying chain.
    if ((options.lazy ? 2.0 * change : change) <= tol) {
      StationaryResult out;
      out.residual = damped ? stationarity_residual(mdp, policy, mu)
                            : (options.lazy ? 2.0 * change : change);
      out.iterations = it;
      out.damped = damped;
      out.lazy = options.lazy;
      mu.normalized = true;
      out.measure = std::move(mu);
      return out;
    }
    double z = 0.0;
    for (double v : next.flat()) z += v;
    for (double& v : next.flat()) v /= z;
    std::swap(mu, next);
  }
  throw NonConvergence("stationary distribution did not converge in " + std::to_string(max_iter) +
                           " iterations (residual " + std::to_string(change) + ")",
                       change, max_iter);
}

StateActionMeasure stationary_distribution(const TabularMdp& mdp, const TabularPolicy& policy,
                                           double tol, long max_iter) {
  return stationary_solve(mdp, policy, tol, max_iter).measure;
}

double weighted_l2_norm(const SaTable& f, const StateActionMeasure& measure) {
  require_same_shape(f, measure, "weighted_l2_norm");
  return std::sqrt(kernels::weighted_dot(measure.flat(), f.flat(), f.flat()));
}

DensityRatio density_ratio(const StateActionMeasure& numerator,
                           const StateActionMeasure& denominator, double floor) {
  require_same_shape(numerator, denominator, "density_ratio");
  DensityRatio w(numerator.n_states(), numerator.n_actions());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (denominator[i] >= floor && denominator[i] > 0.0) {
      w[i] = numerator[i] / denominator[i];
    } else {
      w[i] = 0.0;
      ++w.support_violations;
    }
  }
  return w;
}

StateActionMeasure reweight(const DensityRatio& ratio, const StateActionMeasure& base) {
  require_same_shape(ratio, base, "reweight");
  StateActionMeasure m(base.n_states(), base.n_actions());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = ratio[i] * base[i];
  return m.normalized_copy();
}

std::vector<double> solve_normal_equations(std::vector<double> gram, std::vector<double> rhs,
                                           double ridge) {
  const auto p = static_cast<Eigen::Index>(rhs.size());
  if (gram.size() != rhs.size() * rhs.size()) throw DimensionError("normal equations shape");
  if (!(ridge >= 0.0)) throw InvalidSpec("ridge must be nonnegative");
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> g(gram.data(), p, p);
  Eigen::Map<Eigen::VectorXd> b(rhs.data(), p);
  Eigen::MatrixXd a = g;
  a.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  const Eigen::VectorXd d = ldlt.vectorD();
  const double top = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(top > 0.0) || !std::isfinite(top) ||
      d.minCoeff() <= 1e-13 * top) {
    throw SingularSystem("weighted least-squares normal matrix is singular (ridge " +
                         std::to_string(ridge) + "); use ridge > 0 or more data");
  }
  const Eigen::VectorXd theta = ldlt.solve(b);
  return {theta.data(), theta.data() + p};
}

LinearQ projection_weighted_ls(const SaTable& target, const FeatureMap& features,
                               const StateActionMeasure& measure, double ridge) {
  if (target.size() != features.n_pairs()) throw DimensionError("projection: target shape");
  require_same_shape(target, measure, "projection_weighted_ls");
  const std::size_t p = features.dim();
  std::vector<double> rhs(p, 0.0);
  for (std::size_t i = 0; i < features.n_pairs(); ++i) {
    if (measure[i] != 0.0) kernels::axpy(measure[i] * target[i], features.row(i), rhs);
  }
  return {solve_normal_equations(gram_matrix(features, measure), std::move(rhs), ridge),
          features.id()};
}

double misspecification_gap(const QTable& q_star, const FeatureMap& features,
                            const StateActionMeasure& mu_star) {
  const QTable proj = evaluate_linear(projection_weighted_ls(q_star, features, mu_star, 0.0), features);
  return weighted_l2_norm(proj - q_star, mu_star);
}

double ContractionProfile::rho(double r) const { return gamma + beta_loc * std::pow(r, alpha); }

double ContractionProfile::rho_eff(double r) const {
  return gamma + beta_loc * std::pow(r + eps_f, alpha);
}

ContractionProfile contraction_profile(const TabularMdp& mdp, Temperature tau,
                                       const StateActionMeasure& mu_star,
                                       const TabularPolicy& pi_star, double eps_f, double alpha) {
  require_same_shape(mu_star, pi_star, "contraction_profile");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidSpec("alpha must lie in (0,1]");
  const double min_mass = mu_star.min_mass();
  if (!(min_mass > 0.0)) {
    throw DegenerateSupport("stationary measure has zero mass on some state-action pair");
  }
  double pi_min = 1.0;
  for (std::size_t i = 0; i < pi_star.size(); ++i) {
    if (mu_star[i] > 0.0) pi_min = std::min(pi_min, pi_star[i]);
  }
  if (!(pi_min > 0.0)) throw DegenerateSupport("soft-optimal policy vanishes on the support");

  ContractionProfile prof;
  prof.gamma = mdp.discount();
  prof.tau = tau.value();
  prof.n_actions = mdp.n_actions();
  prof.alpha = alpha;
  prof.pi_min = pi_min;
  prof.c_inf = 1.0 / std::sqrt(min_mass);
  prof.beta_loc = prof.gamma / (2.0 * prof.tau) * prof.c_inf *
                  std::sqrt(static_cast<double>(prof.n_actions) / pi_min);
  prof.r0 = prof.beta_loc > 0.0 ? std::pow((1.0 - prof.gamma) / prof.beta_loc, 1.0 / alpha)
                                : std::numeric_limits<double>::infinity();
  prof.eps_f = eps_f;
  prof.r_max = prof.r0 - eps_f;
  return prof;
}

ContractionProfile gap_enhanced_profile(const ContractionProfile& profile, double action_gap,
                                        double c_gap, double r_gap) {
  if (!(action_gap > 0.0)) throw NoGap("gap-enhanced profile needs a positive action gap");
  if (!(c_gap > 0.0) || !(r_gap > 0.0)) throw InvalidSpec("c_gap and r_gap must be positive");
  ContractionProfile out = profile;
  out.gap_enhanced = true;
  out.beta_loc = profile.gamma / profile.tau * profile.c_inf *
                 std::sqrt(static_cast<double>(profile.n_actions) / profile.pi_min) * c_gap *
                 std::exp(-action_gap / (2.0 * profile.tau));
  const double geometric = out.beta_loc > 0.0
                               ? std::pow((1.0 - out.gamma) / out.beta_loc, 1.0 / out.alpha)
                               : std::numeric_limits<double>::infinity();
  out.r0 = std::min(r_gap, geometric);
  out.r_max = out.r0 - out.eps_f;
  return out;
}

}  // namespace swfqi
