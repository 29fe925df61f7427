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
#include <span>
#include <vector>

namespace swfqi {

/// Dense state-action table stored row-major as [s][a].
class SaTable {
 public:
  SaTable() = default;
  SaTable(std::size_t n_states, std::size_t n_actions, double fill = 0.0);
  SaTable(std::size_t n_states, std::size_t n_actions, std::vector<double> values);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t size() const { return values_.size(); }
  bool same_shape(const SaTable& other) const {
    return n_states_ == other.n_states_ && n_actions_ == other.n_actions_;
  }

  double& operator()(std::size_t s, std::size_t a) { return values_[s * n_actions_ + a]; }
  double operator()(std::size_t s, std::size_t a) const { return values_[s * n_actions_ + a]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> row(std::size_t s) { return {values_.data() + s * n_actions_, n_actions_}; }
  std::span<const double> row(std::size_t s) const {
    return {values_.data() + s * n_actions_, n_actions_};
  }
  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool all_finite() const;

  friend bool operator==(const SaTable&, const SaTable&) = default;

 private:
  std::size_t n_states_ = 0;
  std::size_t n_actions_ = 0;
  std::vector<double> values_;
};

/// Throws DimensionError naming `where` unless the shapes agree.
void require_same_shape(const SaTable& x, const SaTable& y, const char* where);

/// Action-value function Q[s][a].
struct QTable : SaTable {
  using SaTable::SaTable;
  QTable() = default;
  explicit QTable(SaTable t) : SaTable(std::move(t)) {}
};

QTable operator+(const QTable& x, const QTable& y);
QTable operator-(const QTable& x, const QTable& y);
QTable operator*(double c, const QTable& x);
/// x + c·y
QTable add_scaled(const QTable& x, double c, const QTable& y);
double sup_norm(const SaTable& x);
double sup_distance(const SaTable& x, const SaTable& y);

/// Row-stochastic action distribution π[s][a].
struct TabularPolicy : SaTable {
  using SaTable::SaTable;
  TabularPolicy() = default;
  explicit TabularPolicy(SaTable t) : SaTable(std::move(t)) {}

  /// Throws InvalidSpec unless every row is a distribution within `tol`.
  void validate(double tol = 1e-12) const;
};

/// Nonnegative weights over state-action pairs.
struct StateActionMeasure : SaTable {
  using SaTable::SaTable;
  StateActionMeasure() = default;
  StateActionMeasure(SaTable t, bool is_normalized)
      : SaTable(std::move(t)), normalized(is_normalized) {}

  bool normalized = false;

  double total() const;
  double min_mass() const;
  /// Rescales to unit total. Throws DegenerateSupport on a zero measure.
  StateActionMeasure normalized_copy() const;
};

/// Uniform measure 1/(|S||A|) on every pair.
StateActionMeasure uniform_measure(std::size_t n_states, std::size_t n_actions);

}  // namespace swfqi
