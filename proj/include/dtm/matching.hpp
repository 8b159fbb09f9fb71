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

#pragma once

#include <cstddef>
#include <span>

#include "dtm/rng.hpp"
#include "dtm/types.hpp"

namespace dtm {

inline constexpr double kNormEpsilon = 1e-12;

enum class SplitRule {
  Random,       // uniform partition drawn from the rng
  Alternating,  // even indices are sources, odd are destinations
};

/// Dot product of 32- or 64-bit inputs accumulated in 64-bit with a fixed
/// summation order.
double dot64(std::span<const float> a, std::span<const float> b) noexcept;
double dot64(std::span<const double> a, std::span<const double> b) noexcept;

/// a.b / (max(|a|, eps) * max(|b|, eps)). DimensionMismatch on length
/// mismatch.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct BipartiteSplit {
  std::vector<std::size_t> sources;       // ascending, size floor(n/2)
  std::vector<std::size_t> destinations;  // ascending, size ceil(n/2)
};

BipartiteSplit split_tokens(std::size_t n, Rng& rng, SplitRule rule);

/// Matches every source to its most cosine-similar destination and merges the
/// min(r, |sources|) best-scoring sources. Merges are ordered by similarity
/// descending, then source index ascending. Ties between destinations go to
/// the lower index. Similarities accumulate in 64-bit with fused multiply-adds
/// and are bit-identical across instruction sets.
StepMatching bipartite_step(const TokenMatrix& features, std::size_t r,
                            Rng& rng, SplitRule split);
StepMatching bipartite_step(const Matrix64& features, std::size_t r, Rng& rng,
                            SplitRule split);

/// Same selection as bipartite_step for an already drawn split.
StepMatching match_split(const Matrix64& features, std::size_t r,
                         const BipartiteSplit& split);
StepMatching match_split(const TokenMatrix& features, std::size_t r,
                         const BipartiteSplit& split);

}  // namespace dtm
