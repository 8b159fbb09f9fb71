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

#include "dtm/scheduler.hpp"

#include <string>

namespace dtm {

void validate_scheduler_config(const SchedulerConfig& cfg,
                               std::size_t n_tokens) {
  if (n_tokens == 0) throw Error(ErrorCode::InvalidRange, "no tokens");
  if (cfg.n_min < 1 || cfg.n_min > n_tokens) {
    throw Error(ErrorCode::InvalidRange,
                "n_min " + std::to_string(cfg.n_min) + " outside [1, " +
                    std::to_string(n_tokens) + "]");
  }
  if (cfg.k_max < 1) throw Error(ErrorCode::InvalidRange, "k_max must be >= 1");
  if (cfg.n_losses < 1) {
    throw Error(ErrorCode::InvalidRange, "n_losses must be >= 1");
  }
  if (cfg.fixed_n_final &&
      (*cfg.fixed_n_final < 1 || *cfg.fixed_n_final > n_tokens)) {
    throw Error(ErrorCode::InvalidRange,
                "fixed n_final " + std::to_string(*cfg.fixed_n_final) +
                    " outside [1, " + std::to_string(n_tokens) + "]");
  }
}

std::vector<std::size_t> constant_counts(std::size_t n_tokens,
                                         std::size_t n_final, std::size_t k) {
  if (n_final < 1 || n_final > n_tokens || k < 1) {
    throw Error(ErrorCode::InvalidRange,
                "constant_counts(N=" + std::to_string(n_tokens) +
                    ", n_final=" + std::to_string(n_final) +
                    ", k=" + std::to_string(k) + ")");
  }
  const std::size_t total = n_tokens - n_final;
  const std::size_t base = total / k;
  std::vector<std::size_t> counts(k, base);
  counts.back() = total - (k - 1) * base;
  return counts;
}

MorphSchedule make_schedule(std::size_t n_tokens, std::size_t n_final,
                            std::size_t k) {
  return {n_tokens, n_final, k, constant_counts(n_tokens, n_final, k)};
}

MorphSchedule sample_schedule(Rng& rng, std::size_t n_tokens,
                              const SchedulerConfig& cfg) {
  validate_scheduler_config(cfg, n_tokens);
  const std::size_t n_final =
      cfg.fixed_n_final ? *cfg.fixed_n_final
                        : static_cast<std::size_t>(
                              rng.uniform_int(cfg.n_min, n_tokens));
  const auto k = static_cast<std::size_t>(rng.uniform_int(1, cfg.k_max));
  return make_schedule(n_tokens, n_final, k);
}

std::vector<MorphSchedule> sample_schedules(Rng& rng, std::size_t n_tokens,
                                            const SchedulerConfig& cfg) {
  validate_scheduler_config(cfg, n_tokens);
  std::vector<MorphSchedule> out;
  out.reserve(cfg.n_losses);
  for (std::size_t l = 0; l < cfg.n_losses; ++l) {
    out.push_back(sample_schedule(rng, n_tokens, cfg));
  }
  return out;
}

}  // namespace dtm
