/* Copyright 2026 The DTM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "kernels.hpp"

#include <cmath>
#include <limits>

#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
#define DTM_CLONES __attribute__((target_clones("avx512f", "avx2", "default")))
#else
#define DTM_CLONES
#endif

namespace dtm::kernels {
namespace {

template <typename T>
bool finite_scan(const T* x, std::size_t n) {
  unsigned bad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bad |= !(std::abs(x[i]) <= std::numeric_limits<T>::max());
  }
  return bad == 0;
}

}  // namespace

DTM_CLONES void add_to(double* __restrict acc, const float* __restrict x,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += static_cast<double>(x[i]);
}

DTM_CLONES void add_to(double* __restrict acc, const double* __restrict x,
                       std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

DTM_CLONES void widen(double* __restrict out, const float* __restrict x,
                      std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(x[i]);
}

DTM_CLONES void scale(double* x, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= s;
}

DTM_CLONES void scale_into(float* __restrict out, const double* __restrict x,
                          double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(x[i] * s);
}

DTM_CLONES void scale_into(double* __restrict out, const double* __restrict x,
                          double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * s;
}

DTM_CLONES bool all_finite(const float* x, std::size_t n) {
  return finite_scan(x, n);
}

DTM_CLONES bool all_finite(const double* x, std::size_t n) {
  return finite_scan(x, n);
}

}  // namespace dtm::kernels
