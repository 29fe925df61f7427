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
#include <vector>

#include "swfqi/errors.hpp"
#include "swfqi/features.hpp"
#include "swfqi/geometry.hpp"
#include "swfqi/soft_bellman.hpp"
#include "test_support.hpp"

using namespace swfqi;

namespace {

struct Fixture {
  TabularMdp mdp;
  QTable q_star;
  StateActionMeasure mu_star;
};

Fixture solved(std::uint64_t seed, double tau = 0.1) {
  GarnetSpec spec;
  spec.seed = seed;
  Fixture f{generate_garnet(spec), {}, {}};
  f.q_star = solve_soft_q_star(f.mdp, Temperature(tau), 1e-11).q_star;
  f.mu_star = stationary_distribution(f.mdp, softmax_policy(f.q_star, Temperature(tau)), 1e-12);
  return f;
}

}  // namespace

TEST_CASE("realizable features contain Q* and are orthonormal") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto f = solved(seed);
    const auto feats = build_realizable_features(f.q_star, 5, seed, f.mu_star);
    CHECK(feats.dim() == 5);
    CHECK(feats.rank() == 5);
    CHECK(misspecification_gap(f.q_star, feats, f.mu_star) <= 1e-9);
    const auto g = gram_matrix(feats, f.mu_star);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(g[i * 5 + j] - (i == j ? 1.0 : 0.0)) <= 1e-10);

    // θ = ‖Q⋆‖·e1 recovers Q⋆.
    LinearQ e1{{weighted_l2_norm(f.q_star, f.mu_star), 0, 0, 0, 0}, feats.id()};
    CHECK(sup_distance(evaluate_linear(e1, feats), f.q_star) <= 1e-10 * sup_norm(f.q_star));
  }
}

TEST_CASE("realizable class is not Bellman complete") {
  const double tau = 0.1;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto f = solved(seed, tau);
    const auto feats = build_realizable_features(f.q_star, 5, seed, f.mu_star);
    const QTable phi2(feats.column(1));
    const auto t = soft_bellman_apply(f.mdp, phi2, Temperature(tau));
    const auto fit = evaluate_linear(projection_weighted_ls(t, feats, f.mu_star), feats);
    CHECK(weighted_l2_norm(t - fit, f.mu_star) > 1e-6);
  }
}

TEST_CASE("uniform orthonormalization") {
  const auto f = solved(4);
  const auto u = uniform_measure(50, 4);
  const auto feats = build_realizable_features(f.q_star, 4, 4, u);
  const auto g = gram_matrix(feats, u);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(g[i * 4 + j] - (i == j ? 1.0 : 0.0)) <= 1e-10);
  CHECK(misspecification_gap(f.q_star, feats, f.mu_star) <= 1e-9);
}

TEST_CASE("realizable feature errors") {
  const auto f = solved(1);
  CHECK_THROWS_AS(build_realizable_features(f.q_star, 1, 1, f.mu_star), InvalidSpec);
  CHECK_THROWS_AS(build_realizable_features(QTable(50, 4, 0.0), 3, 1, f.mu_star), SingularSystem);
  // More features than pairs cannot be independent.
  const QTable tiny(1, 2, std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(build_realizable_features(tiny, 3, 1, uniform_measure(1, 2)), SingularSystem);
}

TEST_CASE("evaluate_linear oracles") {
  const auto t = test::random_table(12, 3, 5);
  const FeatureMap feats(4, 3, 3, t.values(), "r");
  const auto zero = evaluate_linear(LinearQ{{0, 0, 0}, "r"}, feats);
  for (double v : zero.flat()) CHECK(v == 0.0);

  const std::vector<double> th{0.7, -1.3, 2.1};
  const auto q = evaluate_linear(LinearQ{th, "r"}, feats);
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t a = 0; a < 3; ++a) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 3; ++j) acc += feats(s, a, j) * th[j];
      CHECK(std::abs(q(s, a) - acc) <= 1e-14);
    }

  const std::vector<double> th2{-0.4, 0.2, 1.0};
  std::vector<double> mix(3);
  for (std::size_t j = 0; j < 3; ++j) mix[j] = 2.0 * th[j] - 3.0 * th2[j];
  const auto lhs = evaluate_linear(LinearQ{mix, "r"}, feats);
  const auto rhs = add_scaled(2.0 * q, -3.0, evaluate_linear(LinearQ{th2, "r"}, feats));
  CHECK(sup_distance(lhs, rhs) <= 1e-12);

  CHECK_THROWS_AS(evaluate_linear(LinearQ{{1.0}, "r"}, feats), DimensionError);
}

TEST_CASE("one-hot features") {
  const auto mdp = test::small_garnet(7, 3, 2, 1);
  const auto hot = one_hot_features(mdp);
  CHECK(hot.dim() == 21);
  CHECK(hot.rank() == 21);
  for (std::size_t i = 0; i < 21; ++i) {
    double sum = 0.0;
    for (double v : hot.row(i)) sum += v;
    CHECK(sum == 1.0);
    CHECK(hot.row(i)[i] == 1.0);
  }
  const auto y = test::random_table(7, 3, 2);
  const auto fit = evaluate_linear(projection_weighted_ls(y, hot, test::random_measure(7, 3, 3)), hot);
  CHECK(sup_distance(fit, y) <= 1e-12);
}

TEST_CASE("feature map construction checks") {
  CHECK_THROWS_AS(FeatureMap(2, 2, 0, {}, "x"), InvalidSpec);
  CHECK_THROWS_AS(FeatureMap(2, 2, 1, {1, 2, 3}, "x"), DimensionError);
  CHECK_THROWS_AS(FeatureMap(1, 1, 1, {NAN}, "x"), InvalidSpec);
  const FeatureMap dup(2, 1, 2, {1, 1, 2, 2}, "dup");
  CHECK(dup.rank() == 1);
}
