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

#include "dtm/matching.hpp"

#include <algorithm>
#include <cmath>
#if defined(__x86_64__) && defined(__GNUC__)
#include <immintrin.h>
#endif
#include <numeric>
#include <string>
#include <type_traits>

namespace dtm {
namespace {

// Eight independent lanes summed in a fixed order: vectorizes without
// reassociation, so results do not depend on the instruction set.
template <typename T>
double dot_lanes(const T* a, const T* b, std::size_t n) noexcept {
  constexpr std::size_t kLanes = 8;
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) {
      acc[l] += static_cast<double>(a[i + l]) * static_cast<double>(b[i + l]);
    }
  }
  for (std::size_t l = 0; i < n; ++i, ++l) {
    acc[l] += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
         ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

// Matching kernels. Every implementation keeps eight 64-bit lanes per dot
// product (lane l takes the elements i = l mod 8), updates them with fused
// multiply-adds and shares the tail and the final reduction, so all of them
// return bit-identical results. Float inputs are widened exactly before use.
//
// A block kernel consumes the first 8 * blocks elements and writes lane
// partials: Tile computes a[r] . b[c] into lanes[r * 4 + c], Pairs computes
// a[k] . b[k] into lanes[k].
enum class Shape { Tile, Pairs };

template <typename T>
using LaneBlockFn = void (*)(const T* const*, const T* const*, std::size_t,
                             double (*)[8]);

constexpr std::size_t outputs(Shape shape) { return shape == Shape::Tile ? 16 : 4; }
constexpr std::size_t row_a(Shape shape, std::size_t k) {
  return shape == Shape::Tile ? k / 4 : k;
}
constexpr std::size_t row_b(Shape shape, std::size_t k) {
  return shape == Shape::Tile ? k % 4 : k;
}

template <Shape S, typename T>
void lane_blocks_portable(const T* const* a, const T* const* b,
                          std::size_t blocks, double (*lanes)[8]) noexcept {
  for (std::size_t k = 0; k < outputs(S); ++k) {
    const T* x = a[row_a(S, k)];
    const T* y = b[row_b(S, k)];
    double* v = lanes[k];
    std::fill(v, v + 8, 0.0);
    for (std::size_t i = 0; i < blocks * 8; ++i) {
      v[i % 8] = std::fma(static_cast<double>(x[i]), static_cast<double>(y[i]), v[i % 8]);
    }
  }
}

#if defined(__x86_64__) && defined(__GNUC__)

template <typename T>
__attribute__((target("avx512f,fma"))) inline __m512d load8_avx512(const T* p) {
  if constexpr (std::is_same_v<T, float>) {
    return _mm512_cvtps_pd(_mm256_loadu_ps(p));
  } else {
    return _mm512_loadu_pd(p);
  }
}

template <Shape S, typename T>
__attribute__((target("avx512f,fma"))) void lane_blocks_avx512(
    const T* const* a, const T* const* b, std::size_t blocks,
    double (*lanes)[8]) noexcept {
  if constexpr (S == Shape::Tile) {
    __m512d c00 = _mm512_setzero_pd(), c01 = c00, c02 = c00, c03 = c00;
    __m512d c10 = c00, c11 = c00, c12 = c00, c13 = c00;
    __m512d c20 = c00, c21 = c00, c22 = c00, c23 = c00;
    __m512d c30 = c00, c31 = c00, c32 = c00, c33 = c00;
    for (std::size_t i = 0; i < blocks * 8; i += 8) {
      const __m512d y0 = load8_avx512(b[0] + i), y1 = load8_avx512(b[1] + i);
      const __m512d y2 = load8_avx512(b[2] + i), y3 = load8_avx512(b[3] + i);
      __m512d x = load8_avx512(a[0] + i);
      c00 = _mm512_fmadd_pd(x, y0, c00);
      c01 = _mm512_fmadd_pd(x, y1, c01);
      c02 = _mm512_fmadd_pd(x, y2, c02);
      c03 = _mm512_fmadd_pd(x, y3, c03);
      x = load8_avx512(a[1] + i);
      c10 = _mm512_fmadd_pd(x, y0, c10);
      c11 = _mm512_fmadd_pd(x, y1, c11);
      c12 = _mm512_fmadd_pd(x, y2, c12);
      c13 = _mm512_fmadd_pd(x, y3, c13);
      x = load8_avx512(a[2] + i);
      c20 = _mm512_fmadd_pd(x, y0, c20);
      c21 = _mm512_fmadd_pd(x, y1, c21);
      c22 = _mm512_fmadd_pd(x, y2, c22);
      c23 = _mm512_fmadd_pd(x, y3, c23);
      x = load8_avx512(a[3] + i);
      c30 = _mm512_fmadd_pd(x, y0, c30);
      c31 = _mm512_fmadd_pd(x, y1, c31);
      c32 = _mm512_fmadd_pd(x, y2, c32);
      c33 = _mm512_fmadd_pd(x, y3, c33);
    }
    const __m512d all[16] = {c00, c01, c02, c03, c10, c11, c12, c13,
                             c20, c21, c22, c23, c30, c31, c32, c33};
    for (std::size_t k = 0; k < 16; ++k) _mm512_storeu_pd(lanes[k], all[k]);
  } else {
    __m512d c0 = _mm512_setzero_pd(), c1 = c0, c2 = c0, c3 = c0;
    for (std::size_t i = 0; i < blocks * 8; i += 8) {
      c0 = _mm512_fmadd_pd(load8_avx512(a[0] + i), load8_avx512(b[0] + i), c0);
      c1 = _mm512_fmadd_pd(load8_avx512(a[1] + i), load8_avx512(b[1] + i), c1);
      c2 = _mm512_fmadd_pd(load8_avx512(a[2] + i), load8_avx512(b[2] + i), c2);
      c3 = _mm512_fmadd_pd(load8_avx512(a[3] + i), load8_avx512(b[3] + i), c3);
    }
    _mm512_storeu_pd(lanes[0], c0);
    _mm512_storeu_pd(lanes[1], c1);
    _mm512_storeu_pd(lanes[2], c2);
    _mm512_storeu_pd(lanes[3], c3);
  }
}

template <typename T>
__attribute__((target("avx2,fma"))) inline __m256d load4_avx2(const T* p) {
  if constexpr (std::is_same_v<T, float>) {
    return _mm256_cvtps_pd(_mm_loadu_ps(p));
  } else {
    return _mm256_loadu_pd(p);
  }
}

// One output pair at a time keeps the accumulators in registers.
template <Shape S, typename T>
__attribute__((target("avx2,fma"))) void lane_blocks_avx2(
    const T* const* a, const T* const* b, std::size_t blocks,
    double (*lanes)[8]) noexcept {
  for (std::size_t k = 0; k < outputs(S); k += 2) {
    const T *x0 = a[row_a(S, k)], *y0 = b[row_b(S, k)];
    const T *x1 = a[row_a(S, k + 1)], *y1 = b[row_b(S, k + 1)];
    __m256d l0 = _mm256_setzero_pd(), h0 = l0, l1 = l0, h1 = l0;
    for (std::size_t i = 0; i < blocks * 8; i += 8) {
      l0 = _mm256_fmadd_pd(load4_avx2(x0 + i), load4_avx2(y0 + i), l0);
      h0 = _mm256_fmadd_pd(load4_avx2(x0 + i + 4), load4_avx2(y0 + i + 4), h0);
      l1 = _mm256_fmadd_pd(load4_avx2(x1 + i), load4_avx2(y1 + i), l1);
      h1 = _mm256_fmadd_pd(load4_avx2(x1 + i + 4), load4_avx2(y1 + i + 4), h1);
    }
    _mm256_storeu_pd(lanes[k], l0);
    _mm256_storeu_pd(lanes[k] + 4, h0);
    _mm256_storeu_pd(lanes[k + 1], l1);
    _mm256_storeu_pd(lanes[k + 1] + 4, h1);
  }
}

template <Shape S, typename T>
LaneBlockFn<T> select_lane_blocks() noexcept {
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx512f")) return lane_blocks_avx512<S, T>;
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return lane_blocks_avx2<S, T>;
  }
  return lane_blocks_portable<S, T>;
}

#else

template <Shape S, typename T>
LaneBlockFn<T> select_lane_blocks() noexcept {
  return lane_blocks_portable<S, T>;
}

#endif

template <Shape S, typename T>
void fused_dots(const T* const* a, const T* const* b, std::size_t n,
                double* out) noexcept {
  static const LaneBlockFn<T> blocks_impl = select_lane_blocks<S, T>();
  double lanes[outputs(S)][8];
  const std::size_t blocks = n / 8;
  blocks_impl(a, b, blocks, lanes);
  for (std::size_t k = 0; k < outputs(S); ++k) {
    const T* x = a[row_a(S, k)];
    const T* y = b[row_b(S, k)];
    double* v = lanes[k];
    for (std::size_t i = blocks * 8; i < n; ++i) {
      v[i % 8] = std::fma(static_cast<double>(x[i]), static_cast<double>(y[i]), v[i % 8]);
    }
    out[k] = ((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7]));
  }
}

template <typename T>
StepMatching match_rows(const Matrix<T>& features, std::size_t r,
                        const BipartiteSplit& split) {
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();

  StepMatching out;
  const std::size_t n_merge = std::min(r, split.sources.size());
  if (n_merge > 0 && !split.destinations.empty()) {
    // Short edge groups repeat their last row; the duplicates are ignored.
    const auto rows4 = [&](const std::vector<std::size_t>& idx, std::size_t at,
                           const T** rows) {
      for (std::size_t k = 0; k < 4; ++k) {
        rows[k] = features.row(idx[std::min(at + k, idx.size() - 1)]).data();
      }
    };
    // Only rows taking part in the split need a norm.
    std::vector<double> norms(n);
    for (const auto* idx : {&split.sources, &split.destinations}) {
      for (std::size_t i0 = 0; i0 < idx->size(); i0 += 4) {
        const T* rows[4];
        rows4(*idx, i0, rows);
        double dots[4];
        fused_dots<Shape::Pairs>(rows, rows, d, dots);
        for (std::size_t k = 0; k < 4 && i0 + k < idx->size(); ++k) {
          norms[(*idx)[i0 + k]] = std::max(std::sqrt(dots[k]), kNormEpsilon);
        }
      }
    }

    // Destinations are scanned in ascending order, so the strict comparison
    // keeps the lowest index on ties.
    const auto& srcs = split.sources;
    const auto& dsts = split.destinations;
    std::vector<Merge> best(srcs.size());
    for (std::size_t s = 0; s < srcs.size(); ++s) best[s] = {srcs[s], dsts.front(), -2.0};
    for (std::size_t s0 = 0; s0 < srcs.size(); s0 += 4) {
      const T* a[4];
      rows4(srcs, s0, a);
      for (std::size_t t0 = 0; t0 < dsts.size(); t0 += 4) {
        const T* b[4];
        rows4(dsts, t0, b);
        double dots[16];
        fused_dots<Shape::Tile>(a, b, d, dots);
        for (std::size_t i = 0; i < 4 && s0 + i < srcs.size(); ++i) {
          Merge& m = best[s0 + i];
          for (std::size_t j = 0; j < 4 && t0 + j < dsts.size(); ++j) {
            const std::size_t dst = dsts[t0 + j];
            const double sim = dots[i * 4 + j] / (norms[m.src] * norms[dst]);
            if (sim > m.similarity) {
              m.dst = dst;
              m.similarity = sim;
            }
          }
        }
      }
    }
    std::sort(best.begin(), best.end(), [](const Merge& x, const Merge& y) {
      if (x.similarity != y.similarity) return x.similarity > y.similarity;
      return x.src < y.src;
    });
    best.resize(n_merge);
    out.merges = std::move(best);
  }

  std::vector<bool> removed(n, false);
  for (const auto& m : out.merges) removed[m.src] = true;
  out.kept.reserve(n - out.merges.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed[i]) out.kept.push_back(i);
  }
  return out;
}

template <typename T>
StepMatching step_rows(const Matrix<T>& features, std::size_t r, Rng& rng,
                       SplitRule split) {
  const std::size_t n = features.rows();
  if (r == 0) {
    StepMatching out;
    out.kept.resize(n);
    std::iota(out.kept.begin(), out.kept.end(), std::size_t{0});
    return out;
  }
  if (n < 2) {
    throw Error(ErrorCode::TooFewTokens,
                "bipartite step needs at least 2 tokens, got " +
                    std::to_string(n));
  }
  return match_rows(features, r, split_tokens(n, rng, split));
}

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with lengths " + std::to_string(a.size()) +
                    " and " + std::to_string(b.size()));
  }
  const double na = std::sqrt(dot_lanes(a.data(), a.data(), a.size()));
  const double nb = std::sqrt(dot_lanes(b.data(), b.data(), b.size()));
  return dot_lanes(a.data(), b.data(), a.size()) /
         (std::max(na, kNormEpsilon) * std::max(nb, kNormEpsilon));
}

}  // namespace

double dot64(std::span<const float> a, std::span<const float> b) noexcept {
  return dot_lanes(a.data(), b.data(), std::min(a.size(), b.size()));
}

double dot64(std::span<const double> a, std::span<const double> b) noexcept {
  return dot_lanes(a.data(), b.data(), std::min(a.size(), b.size()));
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  return cosine_impl(a, b);
}

double cosine_similarity(std::span<const double> a,
                         std::span<const double> b) {
  return cosine_impl(a, b);
}

BipartiteSplit split_tokens(std::size_t n, Rng& rng, SplitRule rule) {
  BipartiteSplit split;
  split.sources.reserve(n / 2);
  split.destinations.reserve(n - n / 2);
  if (rule == SplitRule::Alternating) {
    for (std::size_t i = 0; i < n; ++i) {
      (i % 2 == 0 ? split.sources : split.destinations).push_back(i);
    }
    return split;
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, i - 1));
    std::swap(perm[i - 1], perm[j]);
  }
  const auto mid = perm.begin() + static_cast<std::ptrdiff_t>(n / 2);
  split.sources.assign(perm.begin(), mid);
  split.destinations.assign(mid, perm.end());
  std::sort(split.sources.begin(), split.sources.end());
  std::sort(split.destinations.begin(), split.destinations.end());
  return split;
}

StepMatching match_split(const Matrix64& features, std::size_t r,
                         const BipartiteSplit& split) {
  return match_rows(features, r, split);
}

StepMatching match_split(const TokenMatrix& features, std::size_t r,
                         const BipartiteSplit& split) {
  return match_rows(features, r, split);
}

StepMatching bipartite_step(const Matrix64& features, std::size_t r, Rng& rng,
                            SplitRule split) {
  return step_rows(features, r, rng, split);
}

StepMatching bipartite_step(const TokenMatrix& features, std::size_t r,
                            Rng& rng, SplitRule split) {
  return step_rows(features, r, rng, split);
}

}  // namespace dtm
