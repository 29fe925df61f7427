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
#include <limits>
#include <vector>

#include "swfqi/diagnostics.hpp"
#include "swfqi/errors.hpp"
#include "swfqi/fqi.hpp"
#include "test_support.hpp"

using namespace swfqi;

namespace {

Reference garnet_reference(std::uint64_t seed, double tau, TabularMdp& mdp) {
  GarnetSpec spec;
  spec.seed = seed;
  mdp = generate_garnet(spec);
  return make_reference(mdp, Temperature(tau), 1e-12);
}

}  // namespace

TEST_CASE("derivative checks on desk-scale garnets") {
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    TabularMdp mdp;
    for (double tau : {0.1, 0.5, 1.0, 10.0}) {
      const auto ref = garnet_reference(seed, tau, mdp);
      CAPTURE(tau);
      CHECK(check_first_derivative(mdp, ref.q_star, Temperature(tau), ref.mu_star, 20, 1e-5, seed) <= 1e-6);
      CHECK(check_second_derivative(mdp, ref.q_star, Temperature(tau), ref.mu_star, 20, 1e-3, seed) <= 1e-4);
    }
  }
}

TEST_CASE("derivative checks with zero discount report zero") {
  const auto mdp = test::small_garnet(5, 3, 2, 1, 0.0);
  const QTable q(test::random_table(5, 3, 1));
  CHECK(check_first_derivative(mdp, q, Temperature(0.5), uniform_measure(5, 3), 5) == 0.0);
  CHECK(check_second_derivative(mdp, q, Temperature(0.5), uniform_measure(5, 3), 5) == 0.0);
}

TEST_CASE("derivative checks refuse cold temperatures") {
  const auto mdp = test::small_garnet(5, 3, 2, 1);
  const QTable q(5, 3, 0.0);
  CHECK_THROWS_AS(check_first_derivative(mdp, q, Temperature(1e-3), uniform_measure(5, 3), 5), InvalidSpec);
  CHECK_THROWS_AS(check_second_derivative(mdp, q, Temperature(1e-3), uniform_measure(5, 3), 5), InvalidSpec);
}

TEST_CASE("second difference along a constant-in-action direction is negligible") {
  TabularMdp mdp;
  const auto ref = garnet_reference(3, 0.5, mdp);
  SaTable h(50, 4);
  for (std::size_t s = 0; s < 50; ++s)
    for (double& v : h.row(s)) v = std::sin(static_cast<double>(s));
  const double eps = 1e-3;
  const Temperature tau(0.5);
  const auto pp = soft_bellman_difference(mdp, ref.q_star, tau, eps * QTable(h));
  const auto mm = soft_bellman_difference(mdp, ref.q_star, tau, -eps * QTable(h));
  for (std::size_t i = 0; i < pp.size(); ++i) CHECK(std::abs(pp[i] + mm[i]) / (eps * eps) <= 1e-8);
  CHECK(sup_norm(d2T_apply(mdp, ref.q_star, tau, h, h)) <= 1e-15);
}

TEST_CASE("contraction certificate") {
  TabularMdp mdp;
  const double tau = 0.1;
  const auto ref = garnet_reference(1, tau, mdp);
  const auto feats = build_realizable_features(ref.q_star, 5, 1, ref.mu_star);
  const auto prof = contraction_profile(mdp, Temperature(tau), ref.mu_star, ref.pi_star);

  const auto cert = certify_contraction(mdp, Temperature(tau), ref.q_star, feats, ref.mu_star, 0.5 * prof.r0, 200, 1);
  CHECK(cert.pairs_tested == 200);
  CHECK(cert.violations == 0);
  CHECK(cert.projected_violations == 0);
  CHECK(cert.max_projected_ratio <= cert.bound_rho + 1e-9);
  CHECK(cert.bound_rho == doctest::Approx(prof.rho(0.5 * prof.r0)));

  const auto tiny = certify_contraction(mdp, Temperature(tau), ref.q_star, feats, ref.mu_star, 1e-6 * prof.r0, 100, 2);
  CHECK(tiny.max_observed_ratio <= 0.99 + 1e-3);

  CHECK_THROWS_AS(certify_contraction(mdp, Temperature(tau), ref.q_star, feats, ref.mu_star, prof.r0, 10, 1), OutOfRegion);
}

TEST_CASE("remainder bound") {
  TabularMdp mdp;
  const double tau = 0.1;
  const auto ref = garnet_reference(2, tau, mdp);
  const auto prof = contraction_profile(mdp, Temperature(tau), ref.mu_star, ref.pi_star);
  const auto rep = check_remainder_bound(mdp, Temperature(tau), ref.q_star, ref.mu_star, 100, 0.5 * prof.r0, 2);
  CHECK(rep.samples == 100);
  CHECK(rep.worst_slack <= 0.0);
  CHECK(rep.beta_loc == doctest::Approx(prof.beta_loc));

  // At Q = Q⋆ the remainder vanishes exactly.
  const auto at_star = linearization_remainder(mdp, ref.q_star, Temperature(tau), SaTable(50, 4, 0.0));
  CHECK(sup_norm(at_star) == 0.0);

  // The quadratic ratio settles as the radius halves.
  std::vector<double> ratios;
  for (double r = prof.r0; r > prof.r0 / 64; r /= 2) {
    ratios.push_back(check_remainder_bound(mdp, Temperature(tau), ref.q_star, ref.mu_star, 30, r, 5).max_quadratic_ratio);
  }
  const double last = ratios.back(), prev = ratios[ratios.size() - 2];
  CHECK(std::abs(last - prev) <= 0.2 * prev);
  CHECK(last <= 0.5 * prof.beta_loc);
}

TEST_CASE("action gap") {
  const auto single = test::small_garnet(4, 1, 2, 1);
  const auto g1 = measure_action_gap(single);
  CHECK(g1.delta == std::numeric_limits<double>::infinity());
  CHECK(g1.margins.empty());

  // Action a moves to state a. Hardmax values: V = (2, 1), so
  // Q = [[2, 0.5], [1, 0.7]], margins (1.5, 0.3) and Δ = 0.15.
  const TabularMdp hand(2, 2, {1, 0, 0, 1, 1, 0, 0, 1}, SaTable(2, 2, std::vector<double>{1.0, 0.0, 0.0, 0.2}), 0.5);
  const auto g = measure_action_gap(hand);
  CHECK(g.delta == doctest::Approx(0.15).epsilon(1e-8));
  CHECK(g.argmax_actions == std::vector<std::size_t>{0, 0});
  CHECK(g.margins[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(g.ties.empty());

  // Identical actions tie everywhere.
  const TabularMdp tied(2, 2, {1, 0, 1, 0, 0, 1, 0, 1}, SaTable(2, 2, 0.3), 0.5);
  const auto t = measure_action_gap(tied);
  CHECK(t.delta == 0.0);
  CHECK(t.ties.size() == 2);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GarnetSpec spec;
    spec.seed = seed;
    CHECK(measure_action_gap(generate_garnet(spec)).delta > 0.0);
  }
}

TEST_CASE("projected fixed point") {
  TabularMdp mdp;
  const auto ref = garnet_reference(4, 0.1, mdp);
  const auto feats = build_realizable_features(ref.q_star, 5, 4, ref.mu_star);
  const auto found = locate_projected_fixed_point(mdp, Temperature(0.1), feats, ref.mu_star,
                                                  {std::vector<double>(5, 0.0), feats.id()}, 1e-12, 20000);
  CHECK(found.residual <= 1e-9);
  CHECK(weighted_l2_norm(evaluate_linear(found.theta, feats) - ref.q_star, ref.mu_star) <= 1e-8);
  CHECK_THROWS_AS(locate_projected_fixed_point(mdp, Temperature(0.1), feats, ref.mu_star,
                                               {std::vector<double>(5, 0.0), feats.id()}, 1e-12, 3),
                  NonConvergence);
}
