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
#include <span>
#include <string>
#include <vector>

#include "swfqi/rng.hpp"
#include "swfqi/tables.hpp"

namespace swfqi {

/// Finite discounted MDP with a dense transition tensor P[s][a][s'].
class TabularMdp {
 public:
  TabularMdp() = default;
  /// Validates the stochasticity, finiteness and discount invariants.
  TabularMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
             SaTable reward, double discount);

  /// Builds without validation. Only for negative-control tests and for
  /// loading files whose problems should be reported rather than thrown.
  static TabularMdp unchecked(std::size_t n_states, std::size_t n_actions,
                              std::vector<double> transition, SaTable reward, double discount);

  /// Human-readable list of broken invariants; empty when valid.
  std::vector<std::string> violations(double tol = 1e-12) const;

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t n_pairs() const { return n_states_ * n_actions_; }
  double discount() const { return discount_; }
  const SaTable& reward() const { return reward_; }
  double reward(std::size_t s, std::size_t a) const { return reward_(s, a); }

  /// P(·|s,a) as a contiguous row of length n_states.
  std::span<const double> transition_row(std::size_t s, std::size_t a) const {
    return {transition_.data() + (s * n_actions_ + a) * n_states_, n_states_};
  }
  double transition(std::size_t s, std::size_t a, std::size_t s_next) const {
    return transition_[(s * n_actions_ + a) * n_states_ + s_next];
  }
  std::span<const double> transitions() const { return transition_; }
  std::span<double> mutable_transitions() { return transition_; }

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> transition_;
  SaTable reward_;
  double discount_ = 0.0;
};

struct GarnetSpec {
  std::size_t n_states = 50;
  std::size_t n_actions = 4;
  std::size_t branching = 5;
  double reward_std = 0.1;
  double discount = 0.99;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Transition {
  std::uint32_t s = 0;
  std::uint32_t a = 0;
  double r = 0.0;
  std::uint32_t s_next = 0;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct TransitionDataset {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<Transition> records;

  std::size_t size() const { return records.size(); }
  void validate() const;
};

/// Garnet MDP: each (s,a) gets `branching` distinct successors with
/// probabilities given by the spacings of sorted uniforms, and a reward drawn
/// once from N(0, reward_std²).
TabularMdp generate_garnet(const GarnetSpec& spec);

/// Each state's action distribution drawn from the flat Dirichlet.
TabularPolicy dirichlet_behavior_policy(const TabularMdp& mdp, std::uint64_t seed);

/// Reset-style one-step transitions: s uniform, a ~ behavior(·|s),
/// r = r0(s,a), s' ~ P(·|s,a).
TransitionDataset sample_reset_dataset(const TabularMdp& mdp, const TabularPolicy& behavior,
                                       std::size_t n, std::uint64_t seed);

/// ν_b(s,a) = π_b(a|s) / |S|.
StateActionMeasure behavior_measure(const TabularMdp& mdp, const TabularPolicy& behavior);

/// Inverse-CDF draw from a probability row with a uniform u in (0,1).
/// Rounding slack in the cumulative sum falls to the last positive entry.
std::size_t sample_index(std::span<const double> probs, double u);

/// One draw of s' ~ P(·|s,a).
std::size_t sample_successor(const TabularMdp& mdp, std::size_t s, std::size_t a, CounterRng& rng);

}  // namespace swfqi
