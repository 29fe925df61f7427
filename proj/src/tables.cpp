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

#include "swfqi/tables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swfqi/errors.hpp"

namespace swfqi {

SaTable::SaTable(std::size_t n_states, std::size_t n_actions, double fill)
    : n_states_(n_states), n_actions_(n_actions), values_(n_states * n_actions, fill) {}

SaTable::SaTable(std::size_t n_states, std::size_t n_actions, std::vector<double> values)
    : n_states_(n_states), n_actions_(n_actions), values_(std::move(values)) {
  if (values_.size() != n_states * n_actions) {
    throw DimensionError("table has " + std::to_string(values_.size()) + " entries, expected " +
                         std::to_string(n_states * n_actions));
  }
}

bool SaTable::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const SaTable& x, const SaTable& y, const char* where) {
  if (!x.same_shape(y)) {
    throw DimensionError(std::string(where) + ": shape " + std::to_string(x.n_states()) + "x" +
                         std::to_string(x.n_actions()) + " vs " + std::to_string(y.n_states()) +
                         "x" + std::to_string(y.n_actions()));
  }
}

QTable operator+(const QTable& x, const QTable& y) { return add_scaled(x, 1.0, y); }

QTable operator-(const QTable& x, const QTable& y) { return add_scaled(x, -1.0, y); }

QTable operator*(double c, const QTable& x) {
  QTable out = x;
  for (double& v : out.flat()) v *= c;
  return out;
}

QTable add_scaled(const QTable& x, double c, const QTable& y) {
  require_same_shape(x, y, "add_scaled");
  QTable out = x;
  auto o = out.flat();
  auto yy = y.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += c * yy[i];
  return out;
}

double sup_norm(const SaTable& x) {
  double m = 0.0;
  for (double v : x.flat()) m = std::max(m, std::fabs(v));
  return m;
}

double sup_distance(const SaTable& x, const SaTable& y) {
  require_same_shape(x, y, "sup_distance");
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::fabs(x[i] - y[i]));
  return m;
}

void TabularPolicy::validate(double tol) const {
  for (std::size_t s = 0; s < n_states(); ++s) {
    double sum = 0.0;
    for (double p : row(s)) {
      if (!(p >= 0.0)) throw InvalidSpec("policy row " + std::to_string(s) + " has a negative entry");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > tol) {
      throw InvalidSpec("policy row " + std::to_string(s) + " sums to " + std::to_string(sum));
    }
  }
}

double StateActionMeasure::total() const {
  double s = 0.0;
  for (double v : flat()) s += v;
  return s;
}

double StateActionMeasure::min_mass() const {
  double m = flat().empty() ? 0.0 : flat()[0];
  for (double v : flat()) m = std::min(m, v);
  return m;
}

StateActionMeasure StateActionMeasure::normalized_copy() const {
  const double z = total();
  if (!(z > 0.0) || !std::isfinite(z)) throw DegenerateSupport("measure has no mass to normalize");
  StateActionMeasure out = *this;
  for (double& v : out.flat()) v /= z;
  out.normalized = true;
  return out;
}

StateActionMeasure uniform_measure(std::size_t n_states, std::size_t n_actions) {
  const double w = 1.0 / static_cast<double>(n_states * n_actions);
  return StateActionMeasure(SaTable(n_states, n_actions, w), true);
}

}  // namespace swfqi
