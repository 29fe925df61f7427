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

#include "swfqi/kernels.hpp"
#include "swfqi/rng.hpp"

using namespace swfqi;
using namespace swfqi::kernels;

namespace {

std::vector<double> draw(std::size_t n, std::uint64_t sub) {
  CounterRng rng(17, Stream::kDirections, sub);
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

std::vector<const KernelTable*> vector_tables() {
  std::vector<const KernelTable*> out;
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (isa_supported(isa)) out.push_back(&table_for(isa));
  }
  return out;
}

// Reassociated sums may differ from the scalar order by a few ulps of the
// absolute sum.
double sum_tol(const std::vector<double>& terms) {
  double s = 0.0;
  for (double t : terms) s += std::abs(t);
  return 1e-15 * (s + 1.0) * 8;
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  const auto& k = scalar_table();
  const auto x = draw(37, 1), y = draw(37, 2), w = draw(37, 3);
  double dot = 0.0, wdot = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    wdot += w[i] * x[i] * y[i];
    l1 += std::abs(x[i] - y[i]);
  }
  CHECK(k.dot(x.data(), y.data(), x.size()) == doctest::Approx(dot).epsilon(1e-14));
  CHECK(k.weighted_dot(w.data(), x.data(), y.data(), x.size()) == doctest::Approx(wdot).epsilon(1e-14));
  CHECK(k.l1_distance(x.data(), y.data(), x.size()) == doctest::Approx(l1).epsilon(1e-14));

  std::vector<double> z = y;
  k.axpy(0.5, x.data(), z.data(), z.size());
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z[i] == doctest::Approx(y[i] + 0.5 * x[i]));

  const std::size_t p = 5;
  std::vector<double> g(p * p, 0.0);
  k.rank1_update(2.0, x.data(), g.data(), p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) CHECK(g[i * p + j] == doctest::Approx(2.0 * x[i] * x[j]));
    for (std::size_t j = 0; j < i; ++j) CHECK(g[i * p + j] == 0.0);
  }
}

TEST_CASE("empty inputs") {
  const auto& k = scalar_table();
  CHECK(k.dot(nullptr, nullptr, 0) == 0.0);
  CHECK(k.l1_distance(nullptr, nullptr, 0) == 0.0);
  for (const auto* t : vector_tables()) {
    CHECK(t->dot(nullptr, nullptr, 0) == 0.0);
    CHECK(t->weighted_dot(nullptr, nullptr, nullptr, 0) == 0.0);
  }
}

TEST_CASE("vector kernels agree with the scalar reference at every tail length") {
  const auto tables = vector_tables();
  if (tables.empty()) {
    MESSAGE("no vector kernel set on this machine; only the scalar path is exercised");
    return;
  }
  const auto& ref = scalar_table();
  for (const auto* t : tables) {
    CAPTURE(isa_name(t->isa));
    for (std::size_t n = 0; n <= 67; ++n) {
      CAPTURE(n);
      const auto x = draw(n, 10 + n), y = draw(n, 200 + n), w = draw(n, 400 + n);
      std::vector<double> prod(n), wprod(n), diff(n);
      for (std::size_t i = 0; i < n; ++i) {
        prod[i] = x[i] * y[i];
        wprod[i] = w[i] * prod[i];
        diff[i] = x[i] - y[i];
      }
      CHECK(std::abs(t->dot(x.data(), y.data(), n) - ref.dot(x.data(), y.data(), n)) <= sum_tol(prod));
      CHECK(std::abs(t->weighted_dot(w.data(), x.data(), y.data(), n) -
                     ref.weighted_dot(w.data(), x.data(), y.data(), n)) <= sum_tol(wprod));
      CHECK(std::abs(t->l1_distance(x.data(), y.data(), n) - ref.l1_distance(x.data(), y.data(), n)) <=
            sum_tol(diff));

      std::vector<double> a = y, b = y;
      t->axpy(-1.25, x.data(), a.data(), n);
      ref.axpy(-1.25, x.data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(a[i] - b[i]) <= 4e-16 * (std::abs(b[i]) + 2.0));

      if (n >= 1 && n <= 19) {
        std::vector<double> ga(n * n, 0.5), gb(n * n, 0.5);
        t->rank1_update(0.75, x.data(), ga.data(), n);
        ref.rank1_update(0.75, x.data(), gb.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            if (j < i) {
              CHECK(ga[i * n + j] == 0.5);
            } else {
              CHECK(std::abs(ga[i * n + j] - gb[i * n + j]) <= 4e-16 * (std::abs(gb[i * n + j]) + 1.0));
            }
          }
        }
      }
    }
  }
}

TEST_CASE("dispatch") {
  CHECK(isa_supported(Isa::kScalar));
  CHECK(&table_for(Isa::kScalar) == &scalar_table());
  CHECK(isa_supported(active().isa));
#if !defined(__aarch64__)
  CHECK_THROWS(table_for(Isa::kNeon));
#endif
}
