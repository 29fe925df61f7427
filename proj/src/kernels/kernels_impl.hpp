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

namespace swfqi::kernels::detail {

double dot_scalar(const double* x, const double* y, std::size_t n);
double weighted_dot_scalar(const double* w, const double* x, const double* y, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
double l1_distance_scalar(const double* x, const double* y, std::size_t n);
void rank1_update_scalar(double c, const double* x, double* g, std::size_t p);

#if defined(SWFQI_HAVE_AVX2_TU)
double dot_avx2(const double* x, const double* y, std::size_t n);
double weighted_dot_avx2(const double* w, const double* x, const double* y, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
double l1_distance_avx2(const double* x, const double* y, std::size_t n);
void rank1_update_avx2(double c, const double* x, double* g, std::size_t p);
#endif

#if defined(__aarch64__)
double dot_neon(const double* x, const double* y, std::size_t n);
double weighted_dot_neon(const double* w, const double* x, const double* y, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
double l1_distance_neon(const double* x, const double* y, std::size_t n);
void rank1_update_neon(double c, const double* x, double* g, std::size_t p);
#endif

}  // namespace swfqi::kernels::detail
