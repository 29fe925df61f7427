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
#include "swfqi/mdp.hpp"
#include "swfqi/rng.hpp"
#include "test_support.hpp"

using namespace swfqi;

TEST_CASE("garnet at desk scale has exactly `branching` successors") {
  GarnetSpec spec;
  spec.seed = 7;
  const auto mdp = generate_garnet(spec);
  CHECK(mdp.n_states() == 50);
  CHECK(mdp.n_actions() == 4);
  CHECK(mdp.discount() == 0.99);
  for (std::size_t s = 0; s < 50; ++s) {
    for (std::size_t a = 0; a < 4; ++a) {
      int nonzero = 0;
      double total = 0.0;
      for (double p : mdp.transition_row(s, a)) {
        CHECK(p >= 0.0);
        nonzero += p > 0.0;
        total += p;
      }
      CHECK(nonzero == 5);
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("full branching gives dense rows") {
  const auto mdp = test::small_garnet(3, 2, 3, 11);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      double total = 0.0;
      for (double p : mdp.transition_row(s, a)) {
        CHECK(p > 0.0);
        total += p;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("garnet output depends only on its parameters") {
  GarnetSpec spec;
  spec.seed = 42;
  const auto a = generate_garnet(spec), b = generate_garnet(spec);
  CHECK(std::vector<double>(a.transitions().begin(), a.transitions().end()) ==
        std::vector<double>(b.transitions().begin(), b.transitions().end()));
  CHECK(a.reward() == b.reward());
  spec.seed = 43;
  const auto c = generate_garnet(spec);
  CHECK(c.reward() != a.reward());
}

TEST_CASE("garnet rewards follow N(0, reward_std^2)") {
  GarnetSpec spec;
  spec.n_states = 200;
  spec.n_actions = 10;
  spec.reward_std = 0.1;
  spec.seed = 3;
  const auto mdp = generate_garnet(spec);
  double s = 0.0, s2 = 0.0;
  for (double r : mdp.reward().flat()) {
    s += r;
    s2 += r * r;
  }
  const double n = 2000.0;
  CHECK(std::abs(s / n) < 4 * 0.1 / std::sqrt(n));
  CHECK(std::sqrt(s2 / n) == doctest::Approx(0.1).epsilon(0.08));
}

TEST_CASE("every garnet of a 100-seed sweep is a valid MDP") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto mdp = test::small_garnet(20, 3, 4, seed);
    CHECK(mdp.violations().empty());
  }
}

TEST_CASE("garnet spec errors") {
  GarnetSpec spec;
  spec.n_states = 3;
  spec.branching = 4;
  CHECK_THROWS_AS(generate_garnet(spec), InvalidSpec);
  spec.branching = 0;
  CHECK_THROWS_AS(generate_garnet(spec), InvalidSpec);
  spec.branching = 2;
  spec.discount = 1.0;
  CHECK_THROWS_AS(generate_garnet(spec), InvalidSpec);
  spec.discount = 0.5;
  spec.reward_std = -1.0;
  CHECK_THROWS_AS(generate_garnet(spec), InvalidSpec);
}

TEST_CASE("TabularMdp invariants") {
  CHECK_THROWS_AS(TabularMdp(1, 1, {0.9}, SaTable(1, 1), 0.5), InvalidSpec);
  CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, SaTable(1, 1, NAN), 0.5), InvalidSpec);
  CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, SaTable(1, 1), 1.0), InvalidSpec);
  CHECK_THROWS_AS(TabularMdp(2, 1, {1.5, -0.5, 0.0, 1.0}, SaTable(2, 1), 0.5), InvalidSpec);
  CHECK_THROWS_AS(TabularMdp(2, 1, {1.0}, SaTable(2, 1), 0.5), DimensionError);
  const auto bad = TabularMdp::unchecked(1, 1, {0.9}, SaTable(1, 1), 0.5);
  CHECK(bad.violations().size() == 1);
}

TEST_CASE("dirichlet behavior policy") {
  const auto one = test::small_garnet(6, 1, 2, 1);
  const auto pi1 = dirichlet_behavior_policy(one, 9);
  for (std::size_t s = 0; s < 6; ++s) CHECK(pi1(s, 0) == 1.0);

  const auto mdp = test::small_garnet(30, 4, 3, 1);
  const auto pi = dirichlet_behavior_policy(mdp, 5);
  for (std::size_t s = 0; s < 30; ++s) {
    double total = 0.0;
    for (double p : pi.row(s)) {
      CHECK(p >= 0.0);
      total += p;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
  CHECK(pi == dirichlet_behavior_policy(mdp, 5));
  CHECK_FALSE(pi == dirichlet_behavior_policy(mdp, 6));
}

TEST_CASE("flat Dirichlet marginal has mean 1/|A|") {
  const auto mdp = test::small_garnet(4000, 4, 1, 2);
  const auto pi = dirichlet_behavior_policy(mdp, 1);
  double mean = 0.0;
  for (std::size_t s = 0; s < 4000; ++s) mean += pi(s, 2);
  mean /= 4000.0;
  // Beta(1,3) has variance 3/80.
  CHECK(std::abs(mean - 0.25) < 4 * std::sqrt(3.0 / 80.0 / 4000.0));
}

TEST_CASE("reset dataset") {
  const auto mdp = test::small_garnet(10, 3, 3, 4);
  const auto pi = dirichlet_behavior_policy(mdp, 4);
  const auto data = sample_reset_dataset(mdp, pi, 100000, 4);
  CHECK(data.size() == 100000);
  CHECK_NOTHROW(data.validate());
  for (const auto& t : data.records) {
    REQUIRE(t.r == mdp.reward(t.s, t.a));
    REQUIRE(mdp.transition(t.s, t.a, t.s_next) > 0.0);
    REQUIRE(pi(t.s, t.a) > 0.0);
  }
  const auto again = sample_reset_dataset(mdp, pi, 100000, 4);
  CHECK(again.records == data.records);
  CHECK_THROWS_AS(sample_reset_dataset(mdp, pi, 0, 4), InvalidSpec);
}

TEST_CASE("one record on a one-state MDP") {
  const TabularMdp mdp(1, 2, {1.0, 1.0}, SaTable(1, 2, std::vector<double>{0.3, -0.2}), 0.9);
  const TabularPolicy pi(1, 2, std::vector<double>{0.0, 1.0});
  const auto data = sample_reset_dataset(mdp, pi, 1, 0);
  REQUIRE(data.size() == 1);
  CHECK(data.records[0] == Transition{0, 1, -0.2, 0});
}

TEST_CASE("dataset state marginal is uniform") {
  const auto mdp = test::small_garnet(5, 2, 2, 8);
  const auto pi = dirichlet_behavior_policy(mdp, 8);
  const std::size_t n = 1000000;
  const auto data = sample_reset_dataset(mdp, pi, n, 8);
  std::vector<double> freq(5, 0.0);
  for (const auto& t : data.records) freq[t.s] += 1.0;
  const double sigma = std::sqrt(0.2 * 0.8 / n);
  for (double f : freq) CHECK(std::abs(f / n - 0.2) <= 3 * sigma);
}

TEST_CASE("successor draws match the transition row in total variation") {
  const auto mdp = test::small_garnet(12, 2, 6, 21);
  CounterRng rng(21, Stream::kDataset, 77);
  std::vector<double> freq(12, 0.0);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) freq[sample_successor(mdp, 3, 1, rng)] += 1.0;
  double tv = 0.0;
  for (std::size_t j = 0; j < 12; ++j) tv += std::abs(freq[j] / n - mdp.transition(3, 1, j));
  CHECK(0.5 * tv <= 0.01);
}

TEST_CASE("sample_index edge cases") {
  const std::vector<double> p{0.0, 0.25, 0.75, 0.0};
  CHECK(sample_index(p, 1e-9) == 1);
  CHECK(sample_index(p, 0.3) == 2);
  // Rounding slack falls on the last positive entry, never a zero one.
  CHECK(sample_index(p, 1.0 - 1e-17) == 2);
}

TEST_CASE("behavior measure") {
  const auto mdp = test::small_garnet(2, 2, 2, 1);
  const TabularPolicy uniform(2, 2, 0.5);
  const auto nu = behavior_measure(mdp, uniform);
  for (double v : nu.flat()) CHECK(v == doctest::Approx(0.25));

  const auto big = test::small_garnet(13, 4, 3, 2);
  CHECK(std::abs(behavior_measure(big, dirichlet_behavior_policy(big, 3)).total() - 1.0) <= 1e-12);

  const auto three = test::small_garnet(3, 3, 2, 1);
  TabularPolicy det(3, 3, 0.0);
  for (std::size_t s = 0; s < 3; ++s) det(s, s) = 1.0;
  const auto m = behavior_measure(three, det);
  int nonzero = 0;
  for (double v : m.flat()) {
    if (v != 0.0) {
      ++nonzero;
      CHECK(v == doctest::Approx(1.0 / 3.0));
    }
  }
  CHECK(nonzero == 3);
}
