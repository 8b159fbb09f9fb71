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

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "dtm/morph.hpp"
#include "dtm/scheduler.hpp"
#include "oracles.hpp"

using namespace dtm;

namespace {

TokenMatrix four_tokens() {
  return TokenMatrix(4, 2, {1.0f, 0.0f, 0.95f, 0.05f, 0.0f, 1.0f, 0.1f, 0.9f});
}

void check_invariants(const MorphingMatrix& m, std::size_t n, std::size_t groups) {
  CHECK(m.n_tokens() == n);
  CHECK(m.n_groups() == groups);
  std::size_t total = 0;
  for (auto w : m.weights()) {
    CHECK(w >= 1);
    total += w;
  }
  CHECK(total == n);
  for (auto g : m.assignment()) CHECK(g < groups);
}

// Canonical partition: label of each token = smallest token index in its group.
std::vector<std::size_t> partition_of(std::span<const std::uint32_t> ids) {
  std::vector<std::size_t> first(ids.size(), SIZE_MAX), out(ids.size());
  for (std::size_t j = 0; j < ids.size(); ++j) {
    if (first[ids[j]] == SIZE_MAX) first[ids[j]] = j;
    out[j] = first[ids[j]];
  }
  return out;
}

}  // namespace

TEST_CASE("morph with nothing to remove is the identity") {
  Rng rng(1);
  const auto m = morph(four_tokens(), make_schedule(4, 4, 1), rng, SplitRule::Random);
  CHECK(m == MorphingMatrix::identity(4));
}

TEST_CASE("morph merges each source into its best destination") {
  Rng rng(1);
  const auto m = morph(four_tokens(), make_schedule(4, 2, 1), rng, SplitRule::Alternating);
  CHECK(partition_of(m.assignment()) == std::vector<std::size_t>{0, 0, 2, 2});
  CHECK(m.weights()[0] == 2);
  CHECK(m.weights()[1] == 2);
}

TEST_CASE("morph to a single group runs extra rounds inside one iteration") {
  Rng data_rng(5);
  const auto x = oracle::random_matrix(data_rng, 196, 16);
  Rng rng(9);
  const auto m = morph(x, make_schedule(196, 1, 1), rng, SplitRule::Random);
  check_invariants(m, 196, 1);
  CHECK(m.weights()[0] == 196);
}

TEST_CASE("morph rejects schedules built for another token count") {
  Rng rng(1);
  try {
    morph(four_tokens(), make_schedule(5, 2, 1), rng, SplitRule::Random);
    FAIL("expected ScheduleMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ScheduleMismatch);
  }
  MorphSchedule bad = make_schedule(4, 2, 2);
  bad.counts = {1, 2};
  CHECK_THROWS_AS(morph(four_tokens(), bad, rng, SplitRule::Random), Error);
}

TEST_CASE("morph output keeps MorphingMatrix invariants under fuzzing") {
  Rng data_rng(2);
  for (int trial = 0; trial < 150; ++trial) {
    const auto n = static_cast<std::size_t>(data_rng.uniform_int(1, 196));
    const auto d = static_cast<std::size_t>(data_rng.uniform_int(1, 16));
    const auto x = oracle::random_matrix(data_rng, n, d);
    const auto schedule = sample_schedule(data_rng, n, SchedulerConfig{});
    const MorphConfig cfg{trial % 2 ? IntermediateMean::PaperLiteral
                                    : IntermediateMean::SizeWeighted};
    Rng rng(data_rng.next_u64());
    check_invariants(morph(x, schedule, rng, SplitRule::Random, cfg), n, schedule.n_final);
  }
}

TEST_CASE("morph is deterministic and scale invariant") {
  Rng data_rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = oracle::random_matrix(data_rng, 64, 8);
    const auto schedule = sample_schedule(data_rng, 64, SchedulerConfig{});
    Rng a(trial), b(trial), c(trial);
    const auto m1 = morph(x, schedule, a, SplitRule::Random);
    CHECK(m1 == morph(x, schedule, b, SplitRule::Random));
    TokenMatrix scaled = x;
    for (float& v : scaled.data()) v *= 1000.0f;
    CHECK(m1 == morph(scaled, schedule, c, SplitRule::Random));
  }
}

TEST_CASE("size-weighted intermediates equal the final group means") {
  Rng data_rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = oracle::random_matrix(data_rng, 100, 12);
    const auto schedule = sample_schedule(data_rng, 100, SchedulerConfig{});
    Rng rng(trial);
    const auto result = morph_detailed(x, schedule, rng, SplitRule::Random);
    const auto means = apply(result.matrix, x.cast<double>());
    REQUIRE(result.representatives.rows() == means.rows());
    for (std::size_t i = 0; i < means.size(); ++i) {
      const double want = means.data()[i];
      CHECK(std::abs(result.representatives.data()[i] - want) <=
            1e-6 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("paper-literal intermediates average per step without size weights") {
  // Round one pairs 0 with 1. The last round merges {0,1}, 2 and 3 into one
  // destination, so the literal mean counts the pair once.
  TokenMatrix x(4, 2, {4, 0, 2, 0, 0, 1, 0, 3});
  const auto schedule = make_schedule(4, 1, 2);
  Rng a(0), b(0);
  const auto lit = morph_detailed(x, schedule, a, SplitRule::Alternating,
                                  {IntermediateMean::PaperLiteral});
  const auto sw = morph_detailed(x, schedule, b, SplitRule::Alternating,
                                 {IntermediateMean::SizeWeighted});
  CHECK(lit.matrix == sw.matrix);
  CHECK(lit.representatives(0, 0) == doctest::Approx(1.0));
  CHECK(lit.representatives(0, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(sw.representatives(0, 0) == doctest::Approx(1.5));
  CHECK(sw.representatives(0, 1) == doctest::Approx(1.0));

  // Uneven chain: 3 tokens, merge one pair, then the pair with the singleton.
  TokenMatrix y(3, 1, {1, 1, 4});
  const auto chain = make_schedule(3, 1, 2);
  Rng c(0), d(0);
  const auto lit2 = morph_detailed(y, chain, c, SplitRule::Alternating,
                                   {IntermediateMean::PaperLiteral});
  const auto sw2 = morph_detailed(y, chain, d, SplitRule::Alternating,
                                  {IntermediateMean::SizeWeighted});
  CHECK(sw2.representatives(0, 0) == doctest::Approx(2.0));   // (1+1+4)/3
  CHECK(lit2.representatives(0, 0) == doctest::Approx(2.5));  // ((1+1)/2+4)/2
}

TEST_CASE("apply computes flat group means") {
  TokenMatrix x(4, 2, {1, 0, 0, 1, 2, 2, 4, 4});
  const auto m = MorphingMatrix::from_assignment({0, 0, 1, 2});
  const auto out = apply(m, x);
  CHECK(out == TokenMatrix(3, 2, {0.5f, 0.5f, 2, 2, 4, 4}));
  CHECK(apply(MorphingMatrix::identity(4), x) == x);
  CHECK_THROWS_AS(apply(MorphingMatrix::identity(3), x), Error);
}

TEST_CASE("apply matches brute-force group means on fuzzed groupings") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 64));
    const auto groups = static_cast<std::size_t>(rng.uniform_int(1, n));
    std::vector<std::uint32_t> ids(n);
    for (std::size_t j = 0; j < n; ++j) {
      ids[j] = static_cast<std::uint32_t>(j < groups ? j : rng.uniform_int(0, groups - 1));
    }
    const auto x = oracle::random_matrix(rng, n, 5);
    const auto m = MorphingMatrix::from_assignment(ids);
    const auto got = apply(m, x);
    const auto want = oracle::brute_group_means(ids, x);
    for (std::size_t g = 0; g < groups; ++g) {
      for (std::size_t c = 0; c < 5; ++c) {
        CHECK(std::abs(got(g, c) - want[g][c]) <= 1e-6 * std::max(1.0, std::abs(want[g][c])));
      }
    }
  }
}

TEST_CASE("expand broadcasts group rows") {
  const auto m = MorphingMatrix::from_assignment({0, 0, 1});
  TokenMatrix morphed(2, 2, {3, 3, 5, 5});
  CHECK(expand(m, morphed) == TokenMatrix(3, 2, {3, 3, 3, 3, 5, 5}));
  CHECK(expand(MorphingMatrix::identity(2), morphed) == morphed);
  CHECK_THROWS_AS(expand(MorphingMatrix::identity(3), morphed), Error);

  Rng rng(1);
  const auto x = oracle::random_matrix(rng, 12, 3);
  const auto g = MorphingMatrix::from_assignment({0, 1, 2, 0, 1, 2, 3, 3, 3, 0, 1, 2});
  const auto once = apply(g, x);
  CHECK(apply(g, expand(g, once)) == once);
}

TEST_CASE("kmeans separates two well-separated blobs like the brute-force optimum") {
  TokenMatrix x(6, 3, {1.0f, 0.1f, 0.0f,  0.9f, 0.0f, 0.1f,  1.0f, -0.1f, 0.05f,
                       0.0f, 1.0f, 0.9f,  0.1f, 0.9f, 1.0f,  -0.05f, 1.0f, 1.1f});
  // Brute force over every 2-partition: minimize total cosine distance to the
  // normalized group means.
  double best = 1e300;
  std::vector<std::size_t> best_part;
  for (unsigned mask = 1; mask < (1u << 6) - 1; ++mask) {
    std::vector<std::uint32_t> ids(6);
    for (int j = 0; j < 6; ++j) ids[j] = (mask >> j) & 1u;
    if (ids[0] != 0) continue;  // fix label of token 0
    const auto m = MorphingMatrix::from_assignment(ids);
    const auto means = apply(m, x);
    double cost = 0;
    for (std::size_t j = 0; j < 6; ++j) {
      cost += 1.0 - oracle::naive_cosine(x.row(j), means.row(ids[j]));
    }
    if (cost < best) {
      best = cost;
      best_part = partition_of(m.assignment());
    }
  }
  CHECK(best_part == std::vector<std::size_t>{0, 0, 0, 3, 3, 3});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto m = kmeans_grouping(x, 2, 10, rng);
    CHECK(partition_of(m.assignment()) == best_part);
  }
}

TEST_CASE("kmeans degenerate group counts") {
  Rng rng(3);
  const auto x = oracle::random_matrix(rng, 10, 4);
  CHECK(kmeans_grouping(x, 10, 10, rng) == MorphingMatrix::identity(10));
  const auto one = kmeans_grouping(x, 1, 10, rng);
  CHECK(one.n_groups() == 1);
  CHECK(one.weights()[0] == 10);
  CHECK_THROWS_AS(kmeans_grouping(x, 0, 10, rng), Error);
  CHECK_THROWS_AS(kmeans_grouping(x, 11, 10, rng), Error);
  CHECK_THROWS_AS(kmeans_grouping(x, 3, 0, rng), Error);
}

TEST_CASE("kmeans never leaves a group empty") {
  Rng rng(10);
  for (int trial = 0; trial < 40; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 80));
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, n));
    // Duplicated rows make empty clusters likely.
    TokenMatrix x(n, 3);
    for (std::size_t j = 0; j < n; ++j) {
      const float v = static_cast<float>(j % 3);
      x(j, 0) = 1.0f;
      x(j, 1) = v;
      x(j, 2) = -v;
    }
    check_invariants(kmeans_grouping(x, k, 5, rng), n, k);
  }
}

TEST_CASE("downsample_grouping builds spatial blocks") {
  const auto one = downsample_grouping(2, 2, 2);
  CHECK(one.n_groups() == 1);
  CHECK(one.weights()[0] == 4);

  const auto four = downsample_grouping(4, 4, 2);
  CHECK(std::vector<std::uint32_t>(four.assignment().begin(), four.assignment().end()) ==
        std::vector<std::uint32_t>{0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 3, 3, 2, 2, 3, 3});

  const auto vit = downsample_grouping(14, 14, 2);
  CHECK(vit.n_groups() == 49);
  for (auto w : vit.weights()) CHECK(w == 4);

  try {
    downsample_grouping(5, 4, 2);
    FAIL("expected IndivisibleGrid");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IndivisibleGrid);
  }
}
