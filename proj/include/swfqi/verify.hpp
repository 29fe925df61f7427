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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "swfqi/mdp.hpp"

namespace swfqi {

struct VerifyTolerances {
  double soft_residual = 1e-10;
  double stationarity = 1e-12;
  double first_derivative = 1e-6;
  double second_derivative = 1e-4;
  double remainder_slack = 0.0;
  double orthogonality = 1e-10;
};

/// Scales row (state, action) of the transition tensor of one seed's MDP so
/// that it no longer sums to one.
struct CorruptTransition {
  std::uint64_t seed = 0;
  std::size_t state = 0;
  std::size_t action = 0;
  double scale = 0.5;
};

struct VerifyConfig {
  GarnetSpec garnet;
  std::vector<std::uint64_t> seeds;
  std::vector<double> taus{0.5};
  /// Any of: soft_fixed_point, stationarity, first_derivative,
  /// second_derivative, contraction, remainder, projection_orthogonality.
  std::vector<std::string> checks;
  std::size_t directions = 20;
  std::size_t pairs = 200;
  double radius_fraction = 0.5;
  std::size_t remainder_samples = 100;
  std::size_t features_p = 5;
  VerifyTolerances tolerances;
  std::optional<CorruptTransition> corrupt;

  static VerifyConfig from_json(const nlohmann::json& doc);
  static std::vector<std::string> all_checks();
};

struct VerifyCheck {
  std::string name;
  std::uint64_t seed = 0;
  double tau = 0.0;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  std::vector<std::string> warnings;
  /// Contraction certificates keyed by seed, tau and radius.
  nlohmann::json certificates = nlohmann::json::array();

  bool passed() const;
  /// "name[seed=.., tau=..]" for every failed check
  std::vector<std::string> failures() const;
  nlohmann::json to_json() const;
};

/// Runs the requested checks on every (seed, τ). An empty seed or check list
/// passes vacuously with a warning.
VerifyReport run_verify(const VerifyConfig& config);

}  // namespace swfqi
