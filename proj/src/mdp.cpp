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

#include "swfqi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swfqi/errors.hpp"

namespace swfqi {

TabularMdp TabularMdp::unchecked(std::size_t n_states, std::size_t n_actions,
                                 std::vector<double> transition, SaTable reward, double discount) {
  TabularMdp mdp;
  mdp.n_states_ = n_states;
  mdp.n_actions_ = n_actions;
  mdp.transition_ = std::move(transition);
  mdp.reward_ = std::move(reward);
  mdp.discount_ = discount;
  if (mdp.transition_.size() != n_states * n_actions * n_states) {
    throw DimensionError("transition tensor has " + std::to_string(mdp.transition_.size()) +
                         " entries, expected " + std::to_string(n_states * n_actions * n_states));
  }
  if (mdp.reward_.n_states() != n_states || mdp.reward_.n_actions() != n_actions) {
    throw DimensionError("reward table shape does not match the MDP");
  }
  return mdp;
}

TabularMdp::TabularMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
                       SaTable reward, double discount)
    : TabularMdp(unchecked(n_states, n_actions, std::move(transition), std::move(reward), discount)) {
  if (n_states == 0 || n_actions == 0) throw InvalidSpec("MDP needs at least one state and action");
  const auto problems = violations();
  if (!problems.empty()) throw InvalidSpec("invalid MDP: " + problems.front());
}

std::vector<std::string> TabularMdp::violations(double tol) const {
  std::vector<std::string> out;
  if (!(discount_ >= 0.0 && discount_ < 1.0)) {
    out.push_back("discount " + std::to_string(discount_) + " outside [0,1)");
  }
  if (!reward_.all_finite()) out.push_back("reward table has non-finite entries");
  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a = 0; a < n_actions_; ++a) {
      const auto row = transition_row(s, a);
      double sum = 0.0;
      bool negative = false;
      for (double p : row) {
        negative |= !(p >= 0.0);
        sum += p;
      }
      const std::string where = "(" + std::to_string(s) + "," + std::to_string(a) + ")";
      if (negative) out.push_back("transition row " + where + " has a negative or NaN entry");
      if (std::fabs(sum - 1.0) > tol) {
        out.push_back("transition row " + where + " sums to " + std::to_string(sum));
      }
    }
  }
  return out;
}

void GarnetSpec::validate() const {
  if (n_states == 0 || n_actions == 0) throw InvalidSpec("garnet needs n_states, n_actions >= 1");
  if (branching == 0 || branching > n_states) {
    throw InvalidSpec("garnet branching " + std::to_string(branching) + " must lie in [1, n_states=" +
                      std::to_string(n_states) + "]");
  }
  if (!(reward_std >= 0.0)) throw InvalidSpec("garnet reward_std must be nonnegative");
  if (!(discount >= 0.0 && discount < 1.0)) throw InvalidSpec("garnet discount must lie in [0,1)");
}

TabularMdp generate_garnet(const GarnetSpec& spec) {
  spec.validate();
  const std::size_t ns = spec.n_states;
  const std::size_t na = spec.n_actions;
  const std::size_t b = spec.branching;

  CounterRng succ_rng(spec.seed, Stream::kGarnetSuccessors);
  CounterRng prob_rng(spec.seed, Stream::kGarnetProbabilities);
  CounterRng reward_rng(spec.seed, Stream::kGarnetRewards);

  std::vector<double> transition(ns * na * ns, 0.0);
  std::vector<std::size_t> perm(ns);
  std::vector<double> cuts(b + 1);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      // Partial Fisher-Yates: the first b entries are distinct successors.
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(succ_rng.below(ns - i));
        std::swap(perm[i], perm[j]);
      }
      // Spacings of b-1 sorted uniforms; redraw on a (measure-zero) tie so
      // that exactly b successors carry positive mass.
      bool ok = false;
      while (!ok) {
        cuts[0] = 0.0;
        cuts[b] = 1.0;
        for (std::size_t i = 1; i < b; ++i) cuts[i] = prob_rng.uniform();
        std::sort(cuts.begin() + 1, cuts.begin() + static_cast<std::ptrdiff_t>(b));
        ok = true;
        for (std::size_t i = 0; i < b; ++i) ok &= cuts[i + 1] > cuts[i];
      }
      double* row = transition.data() + (s * na + a) * ns;
      for (std::size_t i = 0; i < b; ++i) row[perm[i]] = cuts[i + 1] - cuts[i];
    }
  }

  SaTable reward(ns, na);
  for (std::size_t i = 0; i < ns * na; ++i) reward[i] = spec.reward_std * reward_rng.normal();
  return TabularMdp(ns, na, std::move(transition), std::move(reward), spec.discount);
}

TabularPolicy dirichlet_behavior_policy(const TabularMdp& mdp, std::uint64_t seed) {
  CounterRng rng(seed, Stream::kBehaviorPolicy);
  TabularPolicy pi(mdp.n_states(), mdp.n_actions());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    auto row = pi.row(s);
    if (row.size() == 1) {
      row[0] = 1.0;
      continue;
    }
    double z = 0.0;
    for (double& p : row) {
      p = rng.exponential();
      z += p;
    }
    for (double& p : row) p /= z;
  }
  return pi;
}

std::size_t sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    acc += probs[i];
    if (u < acc && probs[i] > 0.0) return i;
  }
  return last_positive;
}

std::size_t sample_successor(const TabularMdp& mdp, std::size_t s, std::size_t a, CounterRng& rng) {
  return sample_index(mdp.transition_row(s, a), rng.uniform());
}

TransitionDataset sample_reset_dataset(const TabularMdp& mdp, const TabularPolicy& behavior,
                                       std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidSpec("dataset size must be at least 1");
  require_same_shape(behavior, mdp.reward(), "sample_reset_dataset");
  CounterRng rng(seed, Stream::kDataset);
  TransitionDataset data;
  data.n_states = mdp.n_states();
  data.n_actions = mdp.n_actions();
  data.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(rng.below(mdp.n_states()));
    const std::size_t a = sample_index(behavior.row(s), rng.uniform());
    const std::size_t s_next = sample_successor(mdp, s, a, rng);
    data.records.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(a),
                            mdp.reward(s, a), static_cast<std::uint32_t>(s_next)});
  }
  return data;
}

void TransitionDataset::validate() const {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& t = records[i];
    if (t.s >= n_states || t.s_next >= n_states || t.a >= n_actions || !std::isfinite(t.r)) {
      throw InvalidSpec("dataset record " + std::to_string(i) + " out of range");
    }
  }
}

StateActionMeasure behavior_measure(const TabularMdp& mdp, const TabularPolicy& behavior) {
  require_same_shape(behavior, mdp.reward(), "behavior_measure");
  StateActionMeasure nu(mdp.n_states(), mdp.n_actions());
  const double state_mass = 1.0 / static_cast<double>(mdp.n_states());
  for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = state_mass * behavior[i];
  nu.normalized = true;
  return nu;
}

}  // namespace swfqi
