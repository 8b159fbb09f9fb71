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

#include <numeric>

#include "doctest.h"
#include "dtm/scheduler.hpp"

using namespace dtm;

TEST_CASE("constant_counts examples") {
  CHECK(constant_counts(196, 98, 4) == std::vector<std::size_t>{24, 24, 24, 26});
  CHECK(constant_counts(196, 196, 3) == std::vector<std::size_t>{0, 0, 0});
  CHECK(constant_counts(10, 3, 2) == std::vector<std::size_t>{3, 4});
}

TEST_CASE("constant_counts rejects invalid ranges") {
  CHECK_THROWS_AS(constant_counts(10, 11, 2), Error);
  CHECK_THROWS_AS(constant_counts(10, 0, 2), Error);
  CHECK_THROWS_AS(constant_counts(10, 5, 0), Error);
  try {
    constant_counts(10, 11, 2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidRange);
  }
}

TEST_CASE("constant_counts exhaustive properties for N <= 64") {
  for (std::size_t n = 1; n <= 64; ++n) {
    for (std::size_t nf = 1; nf <= n; ++nf) {
      for (std::size_t k = 1; k <= 14; ++k) {
        const auto c = constant_counts(n, nf, k);
        REQUIRE(c.size() == k);
        CHECK(std::accumulate(c.begin(), c.end(), std::size_t{0}) == n - nf);
        const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
        CHECK(*hi - *lo <= k);
      }
    }
  }
}

TEST_CASE("sample_schedule respects its contract") {
  Rng rng(2024);
  SchedulerConfig cfg;
  for (int i = 0; i < 200; ++i) {
    const auto s = sample_schedule(rng, 196, cfg);
    CHECK(s.n_final >= 1);
    CHECK(s.n_final <= 196);
    CHECK(s.steps >= 1);
    CHECK(s.steps <= 14);
    CHECK(std::accumulate(s.counts.begin(), s.counts.end(), std::size_t{0}) ==
          196 - s.n_final);
    CHECK(s.counts == constant_counts(196, s.n_final, s.steps));
  }
}

TEST_CASE("sample_schedule with n_min = N is degenerate") {
  Rng rng(1);
  SchedulerConfig cfg;
  cfg.n_min = 4;
  for (int i = 0; i < 50; ++i) {
    const auto s = sample_schedule(rng, 4, cfg);
    CHECK(s.n_final == 4);
    for (auto r : s.counts) CHECK(r == 0);
  }
}

TEST_CASE("sample_schedule rejects invalid configs") {
  Rng rng(1);
  SchedulerConfig cfg;
  cfg.n_min = 10;
  CHECK_THROWS_AS(sample_schedule(rng, 4, cfg), Error);
  cfg = {};
  cfg.k_max = 0;
  CHECK_THROWS_AS(sample_schedule(rng, 4, cfg), Error);
  cfg = {};
  cfg.fixed_n_final = 5;
  CHECK_THROWS_AS(sample_schedule(rng, 4, cfg), Error);
}

TEST_CASE("n_final is uniform on [n_min, N]") {
  // Mean of U{1..20} is 10.5.
  Rng rng(99);
  SchedulerConfig cfg;
  double sum = 0;
  bool lo = false, hi = false, k1 = false, kmax = false;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto s = sample_schedule(rng, 20, cfg);
    sum += static_cast<double>(s.n_final);
    lo |= s.n_final == 1;
    hi |= s.n_final == 20;
    k1 |= s.steps == 1;
    kmax |= s.steps == 14;
  }
  CHECK(sum / draws == doctest::Approx(10.5).epsilon(0.1 / 10.5));
  CHECK(lo);
  CHECK(hi);
  CHECK(k1);
  CHECK(kmax);
}

TEST_CASE("fixed_n_final pins the count and still samples k") {
  Rng rng(5);
  SchedulerConfig cfg;
  cfg.fixed_n_final = 98;
  for (int i = 0; i < 20; ++i) {
    const auto s = sample_schedule(rng, 196, cfg);
    CHECK(s.n_final == 98);
  }
}

TEST_CASE("sample_schedules draws L schedules deterministically") {
  SchedulerConfig cfg;
  Rng a(7), b(7);
  const auto first = sample_schedules(a, 196, cfg);
  CHECK(first.size() == 2);
  CHECK(first == sample_schedules(b, 196, cfg));
  cfg.n_losses = 1;
  Rng c(7);
  const auto single = sample_schedules(c, 196, cfg);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == first[0]);
}
