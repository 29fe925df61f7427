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

#include "swfqi/soft_bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swfqi/errors.hpp"
#include "swfqi/kernels.hpp"

namespace swfqi {

Temperature::Temperature(double tau) : tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidSpec("temperature must be positive and finite, got " + std::to_string(tau));
  }
}

namespace {

void require_mdp_shape(const TabularMdp& mdp, const SaTable& t, const char* where) {
  if (t.n_states() != mdp.n_states() || t.n_actions() != mdp.n_actions()) {
    throw DimensionError(std::string(where) + ": table shape does not match the MDP");
  }
}

/// out(s,a) = scale · Σ_{s'} P(s'|s,a) g(s') [+ base(s,a)]
QTable propagate(const TabularMdp& mdp, std::span<const double> g, double scale,
                 const SaTable* base) {
  QTable out(mdp.n_states(), mdp.n_actions());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      const double expect = kernels::dot(mdp.transition_row(s, a), g);
      out(s, a) = (base ? (*base)(s, a) : 0.0) + scale * expect;
    }
  }
  return out;
}

// expm1(x) − x without cancellation for small |x|.
double expm1_minus_x(double x) {
  if (std::fabs(x) < 1e-2) {
    const double x2 = x * x;
    return x2 * (0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x * (1.0 / 720 + x / 5040)))));
  }
  return std::expm1(x) - x;
}

/// log Σ_a p(a) e^{x(a)} − Σ_a p(a) x(a) for a distribution p (renormalized
/// here). Nonnegative by Jensen; computed from the centered exponents.
double log_mean_exp_excess(std::span<const double> p, std::span<const double> x, double& mean) {
  double z = 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    z += p[i];
    m += p[i] * x[i];
  }
  m /= z;
  mean = m;
  double spread = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) spread = std::max(spread, std::fabs(x[i] - m));
  }
  if (spread < 0.5) {
    double f = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] > 0.0) f += p[i] * expm1_minus_x(x[i] - m);
    }
    return std::log1p(f / z);
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) top = std::max(top, x[i] - m);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) acc += p[i] * std::exp(x[i] - m - top);
  }
  return top + std::log(acc / z);
}

}  // namespace

TabularPolicy softmax_policy(const QTable& q, Temperature tau) {
  TabularPolicy pi(q.n_states(), q.n_actions());
  const double t = tau.value();
  for (std::size_t s = 0; s < q.n_states(); ++s) {
    const auto in = q.row(s);
    auto out = pi.row(s);
    const double m = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t a = 0; a < in.size(); ++a) {
      out[a] = std::exp((in[a] - m) / t);
      z += out[a];
    }
    for (double& p : out) p /= z;
  }
  return pi;
}

double logsumexp_backup(std::span<const double> v, Temperature tau) {
  if (v.empty()) throw DimensionError("logsumexp_backup of an empty row");
  const double t = tau.value();
  const double m = *std::max_element(v.begin(), v.end());
  if (v.size() == 1) return m;
  double z = 0.0;
  for (double x : v) z += std::exp((x - m) / t);
  return m + t * std::log(z);
}

std::vector<double> soft_state_values(const QTable& q, Temperature tau) {
  std::vector<double> v(q.n_states());
  for (std::size_t s = 0; s < q.n_states(); ++s) v[s] = logsumexp_backup(q.row(s), tau);
  return v;
}

QTable soft_bellman_apply(const TabularMdp& mdp, const QTable& q, Temperature tau) {
  require_mdp_shape(mdp, q, "soft_bellman_apply");
  const auto v = soft_state_values(q, tau);
  return propagate(mdp, v, mdp.discount(), &mdp.reward());
}

QTable soft_eval_apply(const TabularMdp& mdp, const TabularPolicy& policy, const SaTable& f) {
  require_mdp_shape(mdp, f, "soft_eval_apply");
  require_mdp_shape(mdp, policy, "soft_eval_apply");
  std::vector<double> g(mdp.n_states());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) g[s] = kernels::dot(policy.row(s), f.row(s));
  return propagate(mdp, g, 1.0, nullptr);
}

QTable entropy_bonus(const TabularMdp& mdp, const QTable& q, Temperature tau) {
  require_mdp_shape(mdp, q, "entropy_bonus");
  const auto pi = softmax_policy(q, tau);
  std::vector<double> h(mdp.n_states(), 0.0);
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (double p : pi.row(s)) {
      if (p > 0.0) h[s] -= p * std::log(p);
    }
    h[s] *= tau.value();
  }
  return propagate(mdp, h, mdp.discount(), nullptr);
}

QTable soft_eval_operator(const TabularMdp& mdp, const QTable& q_ref, Temperature tau,
                          const QTable& f) {
  const auto pi = softmax_policy(q_ref, tau);
  QTable out = entropy_bonus(mdp, q_ref, tau);
  const QTable pf = soft_eval_apply(mdp, pi, f);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += mdp.reward()[i] + mdp.discount() * pf[i];
  }
  return out;
}

SoftSolveReport solve_soft_q_star(const TabularMdp& mdp, Temperature tau, double tol,
                                  long max_iter) {
  if (!(tol > 0.0)) throw InvalidSpec("solve_soft_q_star: tol must be positive");
  const double gamma = mdp.discount();
  const double step_tol =
      gamma > 0.0 ? tol * (1.0 - gamma) / gamma : std::numeric_limits<double>::infinity();
  QTable q(mdp.n_states(), mdp.n_actions());
  double step = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= max_iter; ++it) {
    QTable next = soft_bellman_apply(mdp, q, tau);
    step = sup_distance(next, q);
    q = std::move(next);
    if (step <= step_tol) {
      const double residual = sup_distance(soft_bellman_apply(mdp, q, tau), q);
      return {std::move(q), it, residual};
    }
  }
  throw NonConvergence("soft value iteration did not converge in " + std::to_string(max_iter) +
                           " iterations (last step " + std::to_string(step) + ")",
                       step, max_iter);
}

QTable dT_apply(const TabularMdp& mdp, const QTable& q, Temperature tau, const SaTable& h) {
  require_mdp_shape(mdp, q, "dT_apply");
  QTable out = soft_eval_apply(mdp, softmax_policy(q, tau), h);
  for (double& v : out.flat()) v *= mdp.discount();
  return out;
}

QTable d2T_apply(const TabularMdp& mdp, const QTable& q, Temperature tau, const SaTable& h1,
                 const SaTable& h2) {
  require_mdp_shape(mdp, q, "d2T_apply");
  require_mdp_shape(mdp, h1, "d2T_apply");
  require_mdp_shape(mdp, h2, "d2T_apply");
  const auto pi = softmax_policy(q, tau);
  std::vector<double> cov(mdp.n_states());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto p = pi.row(s);
    const auto x = h1.row(s);
    const auto y = h2.row(s);
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
      mx += p[a] * x[a];
      my += p[a] * y[a];
    }
    double c = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) c += p[a] * (x[a] - mx) * (y[a] - my);
    cov[s] = c;
  }
  return propagate(mdp, cov, mdp.discount() / tau.value(), nullptr);
}

QTable soft_bellman_difference(const TabularMdp& mdp, const QTable& q_ref, Temperature tau,
                               const SaTable& delta) {
  require_mdp_shape(mdp, q_ref, "soft_bellman_difference");
  require_mdp_shape(mdp, delta, "soft_bellman_difference");
  const double t = tau.value();
  const auto pi = softmax_policy(q_ref, tau);
  std::vector<double> g(mdp.n_states());
  std::vector<double> x(mdp.n_actions());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto d = delta.row(s);
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = d[a] / t;
    double mean = 0.0;
    const double excess = log_mean_exp_excess(pi.row(s), x, mean);
    g[s] = t * mean + t * excess;
  }
  return propagate(mdp, g, mdp.discount(), nullptr);
}

QTable linearization_remainder(const TabularMdp& mdp, const QTable& q_ref, Temperature tau,
                               const SaTable& delta) {
  require_mdp_shape(mdp, q_ref, "linearization_remainder");
  require_mdp_shape(mdp, delta, "linearization_remainder");
  const double t = tau.value();
  const auto pi = softmax_policy(q_ref, tau);
  std::vector<double> g(mdp.n_states());
  std::vector<double> x(mdp.n_actions());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto d = delta.row(s);
    for (std::size_t a = 0; a < x.size(); ++a) x[a] = d[a] / t;
    double mean = 0.0;
    g[s] = t * log_mean_exp_excess(pi.row(s), x, mean);
  }
  return propagate(mdp, g, mdp.discount(), nullptr);
}

}  // namespace swfqi
