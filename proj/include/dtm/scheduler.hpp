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
#include <optional>
#include <vector>

#include "dtm/rng.hpp"
#include "dtm/types.hpp"

namespace dtm {

struct SchedulerConfig {
  std::size_t n_min = 1;     // smallest final token count
  std::size_t k_max = 14;    // largest number of morphing iterations
  std::size_t n_losses = 2;  // schedules drawn per objective evaluation
  // Pins the final token count instead of sampling it (fixed-count ablation).
  std::optional<std::size_t> fixed_n_final;
};

/// Throws InvalidRange when cfg cannot be used with n_tokens.
void validate_scheduler_config(const SchedulerConfig& cfg,
                               std::size_t n_tokens);

/// Splits n_tokens - n_final removals into k equal counts; the last count
/// absorbs the remainder.
std::vector<std::size_t> constant_counts(std::size_t n_tokens,
                                         std::size_t n_final, std::size_t k);

MorphSchedule make_schedule(std::size_t n_tokens, std::size_t n_final,
                            std::size_t k);

/// Draws n_final ~ U[n_min, N] then k ~ U[1, k_max]. With fixed_n_final set
/// only k is drawn.
MorphSchedule sample_schedule(Rng& rng, std::size_t n_tokens,
                              const SchedulerConfig& cfg);

std::vector<MorphSchedule> sample_schedules(Rng& rng, std::size_t n_tokens,
                                            const SchedulerConfig& cfg);

}  // namespace dtm
