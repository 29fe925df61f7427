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

#include "swfqi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "swfqi/errors.hpp"
#include "swfqi/kernels.hpp"
#include "swfqi/rng.hpp"

namespace swfqi {

namespace {

SaTable scaled(const SaTable& h, double c) {
  SaTable out = h;
  for (double& v : out.flat()) v *= c;
  return out;
}

SaTable combine(double a, const SaTable& x, double b, const SaTable& y) {
  SaTable out(x.n_states(), x.n_actions());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
  return out;
}

double relative_error(const SaTable& approx, const SaTable& exact, const StateActionMeasure& m) {
  const double scale = weighted_l2_norm(exact, m);
  const double err = weighted_l2_norm(combine(1.0, approx, -1.0, exact), m);
  return scale > 0.0 ? err / scale : err;
}

void require_tau_floor(Temperature tau) {
  if (tau.value() < kDerivativeTauFloor) {
    throw InvalidSpec("derivative checks need tau >= 0.01");
  }
}

// Curvature of T grows like 1/τ, so below τ = 1 the step shrinks with τ.
double effective_step(double eps, Temperature tau) { return eps * std::min(1.0, tau.value()); }

double log_uniform(CounterRng& rng, double lo, double hi) {
  return lo * std::exp(rng.uniform() * std::log(hi / lo));
}

}  // namespace

SaTable random_unit_direction(std::size_t n_states, std::size_t n_actions,
                              const StateActionMeasure& measure, CounterRng& rng) {
  SaTable h(n_states, n_actions);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (double& v : h.flat()) v = rng.normal();
    const double norm = weighted_l2_norm(h, measure);
    if (norm > 0.0) return scaled(h, 1.0 / norm);
  }
  throw DegenerateSupport("measure gives every random direction zero norm");
}

double check_first_derivative(const TabularMdp& mdp, const QTable& q, Temperature tau,
                              const StateActionMeasure& measure, std::size_t n_directions,
                              double eps, std::uint64_t seed) {
  require_tau_floor(tau);
  if (!(eps > 0.0)) throw InvalidSpec("finite-difference step must be positive");
  CounterRng rng(seed, Stream::kDirections, 1);
  eps = effective_step(eps, tau);
  double worst = 0.0;
  for (std::size_t d = 0; d < n_directions; ++d) {
    const SaTable h = random_unit_direction(mdp.n_states(), mdp.n_actions(), measure, rng);
    const QTable plus = soft_bellman_difference(mdp, q, tau, scaled(h, eps));
    const QTable minus = soft_bellman_difference(mdp, q, tau, scaled(h, -eps));
    const SaTable fd = combine(0.5 / eps, plus, -0.5 / eps, minus);
    worst = std::max(worst, relative_error(fd, dT_apply(mdp, q, tau, h), measure));
  }
  return worst;
}

double check_second_derivative(const TabularMdp& mdp, const QTable& q, Temperature tau,
                               const StateActionMeasure& measure, std::size_t n_directions,
                               double eps, std::uint64_t seed) {
  require_tau_floor(tau);
  if (!(eps > 0.0)) throw InvalidSpec("finite-difference step must be positive");
  CounterRng rng(seed, Stream::kDirections, 2);
  eps = effective_step(eps, tau);
  double worst = 0.0;
  const double c = 1.0 / (4.0 * eps * eps);
  for (std::size_t d = 0; d < n_directions; ++d) {
    const SaTable h1 = random_unit_direction(mdp.n_states(), mdp.n_actions(), measure, rng);
    const SaTable h2 = random_unit_direction(mdp.n_states(), mdp.n_actions(), measure, rng);
    const QTable pp = soft_bellman_difference(mdp, q, tau, combine(eps, h1, eps, h2));
    const QTable pm = soft_bellman_difference(mdp, q, tau, combine(eps, h1, -eps, h2));
    const QTable mp = soft_bellman_difference(mdp, q, tau, combine(-eps, h1, eps, h2));
    const QTable mm = soft_bellman_difference(mdp, q, tau, combine(-eps, h1, -eps, h2));
    SaTable fd(mdp.n_states(), mdp.n_actions());
    for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = c * ((pp[i] - pm[i]) - (mp[i] - mm[i]));
    worst = std::max(worst, relative_error(fd, d2T_apply(mdp, q, tau, h1, h2), measure));
  }
  return worst;
}

ContractionCertificate certify_contraction(const TabularMdp& mdp, Temperature tau,
                                           const QTable& q_star, const FeatureMap& features,
                                           const StateActionMeasure& mu_star, double radius,
                                           std::size_t n_pairs, std::uint64_t seed) {
  if (n_pairs == 0) throw InvalidSpec("certify_contraction needs at least one pair");
  if (!(radius > 0.0)) throw InvalidSpec("certify_contraction needs a positive radius");
  const auto pi_star = softmax_policy(q_star, tau);
  const auto profile = contraction_profile(mdp, tau, mu_star, pi_star);
  if (radius >= profile.r0) throw OutOfRegion("radius is not below r0");

  const LinearQ center_theta = projection_weighted_ls(q_star, features, mu_star, 0.0);
  const QTable center = evaluate_linear(center_theta, features);
  // Offset of the center from Q⋆, kept separately so that tiny radii do not
  // drown in the rounding of Q⋆ itself.
  const QTable center_offset = center - q_star;
  const double gap = weighted_l2_norm(center_offset, mu_star);
  if (gap >= radius) throw OutOfRegion("ball around Q* does not meet the function class");

  ContractionCertificate cert;
  cert.radius_tested = radius;
  cert.bound_rho = profile.rho(radius);
  cert.r0 = profile.r0;
  cert.misspecification = gap;

  CounterRng rng(seed, Stream::kDirections, 3);
  const std::size_t p = features.dim();
  const double lo = std::max(1e-3 * radius, gap * (1.0 + 1e-12));

  // Draws Q − Q⋆ for a point of F at a log-uniform distance from Q⋆.
  auto sample_offset = [&]() {
    for (int attempt = 0; attempt < 100; ++attempt) {
      LinearQ dir{std::vector<double>(p), features.id()};
      for (double& v : dir.theta) v = rng.normal();
      const QTable u = evaluate_linear(dir, features);
      const double norm = weighted_l2_norm(u, mu_star);
      if (!(norm > 0.0)) continue;
      const double dist = lo < radius ? log_uniform(rng, lo, radius) : radius;
      const double t = std::sqrt(std::max(0.0, dist * dist - gap * gap));
      return add_scaled(center_offset, t / norm, u);
    }
    throw DegenerateSupport("feature directions have zero stationary norm");
  };

  for (std::size_t k = 0; k < n_pairs; ++k) {
    const QTable d1 = sample_offset();
    const QTable d2 = sample_offset();
    const QTable diff = d1 - d2;
    const double denom = weighted_l2_norm(diff, mu_star);
    if (!(denom > 0.0)) continue;
    const QTable q2 = q_star + d2;
    // T(Q1) − T(Q2) evaluated as a difference around Q2.
    const QTable t_diff = soft_bellman_difference(mdp, q2, tau, diff);
    const double ratio = weighted_l2_norm(t_diff, mu_star) / denom;
    const QTable proj = evaluate_linear(projection_weighted_ls(t_diff, features, mu_star, 0.0), features);
    const double proj_ratio = weighted_l2_norm(proj, mu_star) / denom;
    ++cert.pairs_tested;
    cert.max_observed_ratio = std::max(cert.max_observed_ratio, ratio);
    cert.max_projected_ratio = std::max(cert.max_projected_ratio, proj_ratio);
    if (ratio > cert.bound_rho + cert.slack) ++cert.violations;
    if (proj_ratio > cert.bound_rho + cert.slack) ++cert.projected_violations;
  }
  if (cert.pairs_tested == 0) throw DegenerateSupport("every sampled pair coincided");
  return cert;
}

RemainderReport check_remainder_bound(const TabularMdp& mdp, Temperature tau,
                                      const QTable& q_star, const StateActionMeasure& mu_star,
                                      std::size_t n_samples, double max_radius,
                                      std::uint64_t seed) {
  if (!(max_radius > 0.0)) throw InvalidSpec("check_remainder_bound needs a positive radius");
  const auto profile = contraction_profile(mdp, tau, mu_star, softmax_policy(q_star, tau));
  RemainderReport rep;
  rep.beta_loc = profile.beta_loc;
  rep.worst_slack = -std::numeric_limits<double>::infinity();
  CounterRng rng(seed, Stream::kDirections, 4);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const SaTable u = random_unit_direction(mdp.n_states(), mdp.n_actions(), mu_star, rng);
    const double r = log_uniform(rng, 1e-3 * max_radius, max_radius);
    const SaTable delta = scaled(u, r);
    const double dist = weighted_l2_norm(delta, mu_star);
    const double lhs = weighted_l2_norm(linearization_remainder(mdp, q_star, tau, delta), mu_star);
    const double rhs = 0.5 * profile.beta_loc * std::pow(dist, 1.0 + profile.alpha);
    rep.worst_slack = std::max(rep.worst_slack, lhs - rhs);
    rep.max_quadratic_ratio = std::max(rep.max_quadratic_ratio, lhs / (dist * dist));
    ++rep.samples;
  }
  if (rep.samples == 0) rep.worst_slack = 0.0;
  return rep;
}

GapReport measure_action_gap(const TabularMdp& mdp, double tol) {
  GapReport rep;
  const std::size_t na = mdp.n_actions();
  if (na <= 1) {
    rep.delta = std::numeric_limits<double>::infinity();
    rep.argmax_actions.assign(mdp.n_states(), 0);
    return rep;
  }
  const QTable q = solve_soft_q_star(mdp, Temperature(kHardmaxTau), 1e-11).q_star;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    const auto row = q.row(s);
    std::size_t best = 0;
    for (std::size_t a = 1; a < na; ++a) {
      if (row[a] > row[best]) best = a;
    }
    double second = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
      if (a != best) second = std::max(second, row[a]);
    }
    rep.argmax_actions.push_back(best);
    rep.margins.push_back(row[best] - second);
    if (row[best] - second <= tol) rep.ties.push_back(s);
  }
  std::vector<double> sorted = rep.margins;
  std::sort(sorted.begin(), sorted.end());
  rep.margin_min = sorted.front();
  rep.margin_max = sorted.back();
  const std::size_t n = sorted.size();
  rep.margin_median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  rep.delta = rep.ties.empty() ? 0.5 * rep.margin_min : 0.0;
  return rep;
}

ProjectedFixedPoint locate_projected_fixed_point(const TabularMdp& mdp, Temperature tau,
                                                 const FeatureMap& features,
                                                 const StateActionMeasure& measure,
                                                 const LinearQ& q0, double tol, long max_iter) {
  ProjectedFixedPoint out;
  out.theta = q0;
  QTable q = evaluate_linear(q0, features);
  for (long it = 1; it <= max_iter; ++it) {
    LinearQ next = projection_weighted_ls(soft_bellman_apply(mdp, q, tau), features, measure);
    QTable q_next = evaluate_linear(next, features);
    out.residual = weighted_l2_norm(q_next - q, measure);
    out.theta = std::move(next);
    q = std::move(q_next);
    out.iterations = it;
    if (out.residual <= tol) break;
  }
  // Residual at the returned point rather than at the previous iterate.
  const QTable image = evaluate_linear(projection_weighted_ls(soft_bellman_apply(mdp, q, tau), features, measure), features);
  out.residual = weighted_l2_norm(image - q, measure);
  if (out.residual > tol) {
    throw NonConvergence("projected fixed point not located", out.residual, out.iterations);
  }
  return out;
}

}  // namespace swfqi
