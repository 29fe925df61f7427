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

#include "swfqi/mdp.hpp"
#include "swfqi/tables.hpp"

namespace swfqi {

/// Linear features φ[s][a][j], j < p, stored pair-major.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t n_states, std::size_t n_actions, std::size_t p, std::vector<double> phi,
             std::string id);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t n_pairs() const { return n_states_ * n_actions_; }
  std::size_t dim() const { return p_; }
  /// Numerical column rank (relative tolerance 1e-10 on singular values).
  std::size_t rank() const { return rank_; }
  const std::string& id() const { return id_; }

  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {phi_.data() + (s * n_actions_ + a) * p_, p_};
  }
  std::span<const double> row(std::size_t pair) const { return {phi_.data() + pair * p_, p_}; }
  double operator()(std::size_t s, std::size_t a, std::size_t j) const {
    return phi_[(s * n_actions_ + a) * p_ + j];
  }
  /// Column j as a state-action table.
  SaTable column(std::size_t j) const;
  std::span<const double> data() const { return phi_; }

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::size_t p_ = 0;
  std::size_t rank_ = 0;
  std::vector<double> phi_;
  std::string id_;
};

struct LinearQ {
  std::vector<double> theta;
  std::string feature_id;
};

enum class OrthonormalizeIn { kMuStar, kUniform };

/// First column is Q⋆, the remaining p−1 are i.i.d. standard Gaussian; all
/// columns are then orthonormalized in L²(measure) by two passes of modified
/// Gram-Schmidt. The span contains Q⋆ exactly; its coefficient is
/// ‖Q⋆‖_{2,measure} on the first column. Redraws the random columns up to 10
/// times on rank loss, then throws SingularSystem.
FeatureMap build_realizable_features(const QTable& q_star, std::size_t p, std::uint64_t seed,
                                     const StateActionMeasure& measure);

/// Q[s][a] = φ(s,a)ᵀθ.
QTable evaluate_linear(const LinearQ& q, const FeatureMap& features);

/// |S||A| indicator features: the Bellman-complete control class.
FeatureMap one_hot_features(const TabularMdp& mdp);

/// Gram matrix Σ m(s,a) φφᵀ (row-major p×p).
std::vector<double> gram_matrix(const FeatureMap& features, const StateActionMeasure& measure);

}  // namespace swfqi
