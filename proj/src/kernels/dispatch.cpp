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

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"
#include "swfqi/kernels.hpp"

namespace swfqi::kernels {

namespace {

const KernelTable kScalar{Isa::kScalar,
                          detail::dot_scalar,
                          detail::weighted_dot_scalar,
                          detail::axpy_scalar,
                          detail::l1_distance_scalar,
                          detail::rank1_update_scalar};

#if defined(SWFQI_HAVE_AVX2_TU)
const KernelTable kAvx2{Isa::kAvx2,
                        detail::dot_avx2,
                        detail::weighted_dot_avx2,
                        detail::axpy_avx2,
                        detail::l1_distance_avx2,
                        detail::rank1_update_avx2};
#endif

#if defined(__aarch64__)
const KernelTable kNeon{Isa::kNeon,
                        detail::dot_neon,
                        detail::weighted_dot_neon,
                        detail::axpy_neon,
                        detail::l1_distance_neon,
                        detail::rank1_update_neon};
#endif

const KernelTable& choose() {
  if (const char* env = std::getenv("SWFQI_ISA")) {
    const std::string requested(env);
    if (requested == "scalar") return kScalar;
    if (requested == "avx2" && isa_supported(Isa::kAvx2)) return table_for(Isa::kAvx2);
    if (requested == "neon" && isa_supported(Isa::kNeon)) return table_for(Isa::kNeon);
  }
  if (isa_supported(Isa::kAvx2)) return table_for(Isa::kAvx2);
  if (isa_supported(Isa::kNeon)) return table_for(Isa::kNeon);
  return kScalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(SWFQI_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::runtime_error("kernel set not supported here: " + std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(SWFQI_HAVE_AVX2_TU)
    case Isa::kAvx2:
      return kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::kNeon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const KernelTable& active() {
  static const KernelTable& table = choose();
  return table;
}

}  // namespace swfqi::kernels
