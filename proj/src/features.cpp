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

#include "swfqi/features.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "swfqi/errors.hpp"
#include "swfqi/kernels.hpp"
#include "swfqi/rng.hpp"

namespace swfqi {

namespace {

std::size_t numerical_rank(std::size_t rows, std::size_t cols, const std::vector<double>& data) {
  if (rows == 0 || cols == 0) return 0;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  return static_cast<std::size_t>(qr.rank());
}

}  // namespace

FeatureMap::FeatureMap(std::size_t n_states, std::size_t n_actions, std::size_t p,
                       std::vector<double> phi, std::string id)
    : n_states_(n_states), n_actions_(n_actions), p_(p), phi_(std::move(phi)), id_(std::move(id)) {
  if (p_ == 0) throw InvalidSpec("feature map needs at least one feature");
  if (phi_.size() != n_states * n_actions * p) throw DimensionError("feature tensor size mismatch");
  for (double v : phi_) {
    if (!std::isfinite(v)) throw InvalidSpec("feature tensor has non-finite entries");
  }
  rank_ = numerical_rank(n_states * n_actions, p, phi_);
}

SaTable FeatureMap::column(std::size_t j) const {
  SaTable col(n_states_, n_actions_);
  for (std::size_t i = 0; i < n_pairs(); ++i) col[i] = phi_[i * p_ + j];
  return col;
}

FeatureMap build_realizable_features(const QTable& q_star, std::size_t p, std::uint64_t seed,
                                     const StateActionMeasure& measure) {
  if (p < 2) throw InvalidSpec("realizable features need p >= 2");
  require_same_shape(q_star, measure, "build_realizable_features");
  const std::size_t n = q_star.size();
  const auto m = measure.flat();

  auto inner = [&](const std::vector<double>& x, const std::vector<double>& y) {
    return kernels::weighted_dot(m, x, y);
  };

  for (int attempt = 0; attempt < 10; ++attempt) {
    CounterRng rng(seed, Stream::kFeatures, static_cast<std::uint64_t>(attempt));
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    cols[0].assign(q_star.flat().begin(), q_star.flat().end());
    for (std::size_t j = 1; j < p; ++j) {
      for (double& v : cols[j]) v = rng.normal();
    }

    bool ok = true;
    for (std::size_t j = 0; j < p && ok; ++j) {
      const double before = std::sqrt(inner(cols[j], cols[j]));
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
          const double c = inner(cols[i], cols[j]);
          kernels::axpy(-c, cols[i], cols[j]);
        }
      }
      const double norm = std::sqrt(inner(cols[j], cols[j]));
      if (!(norm > 1e-10 * std::max(before, 1e-300))) {
        if (j == 0) throw SingularSystem("Q* has zero norm under the orthonormalization measure");
        ok = false;
        break;
      }
      for (double& v : cols[j]) v /= norm;
    }
    if (!ok) continue;

    std::vector<double> phi(n * p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) phi[i * p + j] = cols[j][i];
    }
    return FeatureMap(q_star.n_states(), q_star.n_actions(), p, std::move(phi),
                      "realizable-p" + std::to_string(p) + "-seed" + std::to_string(seed));
  }
  throw SingularSystem("realizable feature construction lost rank in 10 draws");
}

QTable evaluate_linear(const LinearQ& q, const FeatureMap& features) {
  if (q.theta.size() != features.dim()) {
    throw DimensionError("theta has " + std::to_string(q.theta.size()) + " entries, features have " +
                         std::to_string(features.dim()));
  }
  QTable out(features.n_states(), features.n_actions());
  for (std::size_t i = 0; i < features.n_pairs(); ++i) out[i] = kernels::dot(features.row(i), q.theta);
  return out;
}

FeatureMap one_hot_features(const TabularMdp& mdp) {
  const std::size_t n = mdp.n_pairs();
  std::vector<double> phi(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) phi[i * n + i] = 1.0;
  return FeatureMap(mdp.n_states(), mdp.n_actions(), n, std::move(phi), "one-hot");
}

std::vector<double> gram_matrix(const FeatureMap& features, const StateActionMeasure& measure) {
  if (measure.size() != features.n_pairs()) throw DimensionError("gram_matrix: measure shape");
  const std::size_t p = features.dim();
  std::vector<double> g(p * p, 0.0);
  for (std::size_t i = 0; i < features.n_pairs(); ++i) {
    if (measure[i] != 0.0) kernels::rank1_update(measure[i], features.row(i), g);
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) g[i * p + j] = g[j * p + i];
  }
  return g;
}

}  // namespace swfqi
