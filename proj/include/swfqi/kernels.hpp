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

// Dense double-precision inner loops. Every kernel has a portable scalar
// reference implementation; vectorized variants are selected once at
// startup from what the CPU reports. Setting SWFQI_ISA=scalar in the
// environment pins the reference path (useful for cross-machine
// reproducibility audits, since vector variants reassociate sums).

#include <cstddef>
#include <span>
#include <string_view>

namespace swfqi::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  /// Σ x[i]·y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// Σ w[i]·x[i]·y[i]
  double (*weighted_dot)(const double* w, const double* x, const double* y, std::size_t n);
  /// y[i] += alpha·x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// Σ |x[i] - y[i]|
  double (*l1_distance)(const double* x, const double* y, std::size_t n);
  /// Upper triangle (row-major, p×p) of G += c·x·xᵀ.
  void (*rank1_update)(double c, const double* x, double* g, std::size_t p);
};

/// Reference implementations; always available.
const KernelTable& scalar_table();

bool isa_supported(Isa isa);
/// Throws std::runtime_error if `isa` is not supported on this CPU or build.
const KernelTable& table_for(Isa isa);
/// The table chosen at first use.
const KernelTable& active();

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline double weighted_dot(std::span<const double> w, std::span<const double> x,
                           std::span<const double> y) {
  return active().weighted_dot(w.data(), x.data(), y.data(), x.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double l1_distance(std::span<const double> x, std::span<const double> y) {
  return active().l1_distance(x.data(), y.data(), x.size());
}

inline void rank1_update(double c, std::span<const double> x, std::span<double> g) {
  active().rank1_update(c, x.data(), g.data(), x.size());
}

}  // namespace swfqi::kernels
