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

#include "dtm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "dtm/morph.hpp"

namespace dtm {
namespace {

volatile float g_sink = 0.0f;

TokenMatrix random_tokens(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  TokenMatrix t(n, d);
  for (float& v : t.data()) v = static_cast<float>(rng.normal());
  return t;
}

std::size_t square_side(std::size_t n) {
  auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n) {
    throw Error(ErrorCode::GridMismatch,
                std::to_string(n) + " tokens do not form a square grid");
  }
  return side;
}

}  // namespace

BenchVariant parse_bench_variant(std::string_view name) {
  if (name == "bipartite") return BenchVariant::Bipartite;
  if (name == "kmeans") return BenchVariant::KMeans;
  if (name == "downsample") return BenchVariant::Downsample;
  throw Error(ErrorCode::InvalidArgument,
              "unknown bench variant '" + std::string(name) + "'");
}

std::string_view bench_variant_name(BenchVariant v) noexcept {
  switch (v) {
    case BenchVariant::Bipartite: return "bipartite";
    case BenchVariant::KMeans: return "kmeans";
    case BenchVariant::Downsample: return "downsample";
  }
  return "unknown";
}

TimingSummary bench_variant(BenchVariant variant, std::size_t n_tokens,
                            std::size_t dim, const MorphSchedule& schedule,
                            Rng& rng, const BenchOptions& opts) {
  if (opts.reps < 30 || opts.warmup < 5) {
    throw Error(ErrorCode::InvalidRange,
                "bench needs reps >= 30 and warmup >= 5");
  }
  if (n_tokens == 0 || dim == 0) {
    throw Error(ErrorCode::InvalidRange, "bench needs N >= 1 and d >= 1");
  }
  if (variant != BenchVariant::Downsample && schedule.n_tokens != n_tokens) {
    throw Error(ErrorCode::ScheduleMismatch,
                "schedule built for " + std::to_string(schedule.n_tokens) +
                    " tokens");
  }
  const std::size_t side =
      variant == BenchVariant::Downsample ? square_side(n_tokens) : 0;

  TimingSummary summary;
  summary.per_rep_us.reserve(opts.reps);
  MorphWorkspace workspace;
  for (std::size_t rep = 0; rep < opts.warmup + opts.reps; ++rep) {
    const std::uint64_t seed = rng.next_u64();
    const TokenMatrix tokens = random_tokens(n_tokens, dim, seed);
    Rng group_rng(seed ^ 0xD1B54A32D192ED03ULL);

    const auto start = std::chrono::steady_clock::now();
    MorphingMatrix m = [&] {
      switch (variant) {
        case BenchVariant::Bipartite:
          return morph(tokens, schedule, group_rng, SplitRule::Random, {}, workspace);
        case BenchVariant::KMeans:
          return kmeans_grouping(tokens, schedule.n_final, opts.kmeans_iters,
                                 group_rng);
        case BenchVariant::Downsample:
          break;
      }
      return downsample_grouping(side, side, 2);
    }();
    const TokenMatrix pooled = apply(m, tokens);
    const auto stop = std::chrono::steady_clock::now();
    g_sink = g_sink + pooled(0, 0);

    const std::size_t covered = std::accumulate(
        m.weights().begin(), m.weights().end(), std::size_t{0});
    if (covered != n_tokens || pooled.rows() != m.n_groups()) {
      throw Error(ErrorCode::Internal, "bench output violates group invariants");
    }
    if (rep >= opts.warmup) {
      summary.per_rep_us.push_back(
          std::chrono::duration<double, std::micro>(stop - start).count());
    }
  }

  std::vector<double> sorted = summary.per_rep_us;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  summary.median_us =
      n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const auto p90_rank = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(n)));
  summary.p90_us = sorted[std::max<std::size_t>(p90_rank, 1) - 1];
  return summary;
}

}  // namespace dtm
