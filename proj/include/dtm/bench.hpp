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
#include <cstdint>
#include <string_view>
#include <vector>

#include "dtm/rng.hpp"
#include "dtm/types.hpp"

namespace dtm {

enum class BenchVariant { Bipartite, KMeans, Downsample };

BenchVariant parse_bench_variant(std::string_view name);
std::string_view bench_variant_name(BenchVariant v) noexcept;

struct BenchOptions {
  std::size_t reps = 50;
  std::size_t warmup = 5;
  std::size_t kmeans_iters = 10;
};

struct TimingSummary {
  double median_us = 0.0;
  double p90_us = 0.0;
  std::vector<double> per_rep_us;
};

/// Times grouping + apply only. Inputs are regenerated per rep from a seed
/// drawn from `rng`, so every variant sees identical tokens for the same rng
/// state. Bipartite follows `schedule`; k-means uses schedule.n_final groups;
/// downsample pools 2x2 blocks of a square grid.
TimingSummary bench_variant(BenchVariant variant, std::size_t n_tokens,
                            std::size_t dim, const MorphSchedule& schedule,
                            Rng& rng, const BenchOptions& opts = {});

}  // namespace dtm
