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

#include "doctest.h"
#include "dtm/matching.hpp"
#include "oracles.hpp"

using namespace dtm;

namespace {

TokenMatrix four_tokens() {
  return TokenMatrix(4, 2, {1.0f, 0.0f, 0.95f, 0.05f, 0.0f, 1.0f, 0.1f, 0.9f});
}

}  // namespace

TEST_CASE("cosine_similarity examples") {
  const std::vector<float> e0{1, 0}, e1{0, 1}, a{2, 0}, b{5, 0};
  CHECK(cosine_similarity(std::span<const float>(e0), std::span<const float>(e1)) == 0.0);
  CHECK(cosine_similarity(std::span<const float>(a), std::span<const float>(b)) ==
        doctest::Approx(1.0).epsilon(1e-15));
  // 0.95 / sqrt(0.905), evaluated on the float-rounded inputs.
  const std::vector<float> c{0.95f, 0.05f};
  const double expected = double(0.95f) / std::sqrt(double(0.95f) * double(0.95f) +
                                                    double(0.05f) * double(0.05f));
  CHECK(cosine_similarity(std::span<const float>(e0), std::span<const float>(c)) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.9986178).epsilon(1e-7));
}

TEST_CASE("cosine_similarity guards zero vectors and length mismatch") {
  const std::vector<float> z{0, 0}, e0{1, 0}, three{1, 2, 3};
  CHECK(cosine_similarity(std::span<const float>(z), std::span<const float>(e0)) == 0.0);
  CHECK_THROWS_AS(
      cosine_similarity(std::span<const float>(e0), std::span<const float>(three)),
      Error);
}

TEST_CASE("dot64 matches a naive 64-bit loop on long vectors") {
  Rng rng(4);
  const auto m = oracle::random_matrix(rng, 2, 1001);
  double naive = 0;
  for (std::size_t i = 0; i < 1001; ++i) naive += double(m(0, i)) * double(m(1, i));
  CHECK(dot64(m.row(0), m.row(1)) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("bipartite_step picks the most similar cross pair") {
  Rng rng(0);
  const auto step = bipartite_step(four_tokens(), 1, rng, SplitRule::Alternating);
  REQUIRE(step.merges.size() == 1);
  CHECK(step.merges[0].src == 0);
  CHECK(step.merges[0].dst == 1);
  CHECK(step.kept == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("bipartite_step with r = 0 is a no-op") {
  Rng rng(0);
  const auto step = bipartite_step(four_tokens(), 0, rng, SplitRule::Random);
  CHECK(step.merges.empty());
  CHECK(step.kept == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("bipartite_step on two tokens merges the only pair") {
  TokenMatrix two(2, 3, {1, 2, 3, 3, 2, 1});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto step = bipartite_step(two, 1, rng, SplitRule::Random);
    REQUIRE(step.merges.size() == 1);
    CHECK(step.merges[0].src != step.merges[0].dst);
    CHECK(step.kept.size() == 1);
    CHECK(step.kept[0] == step.merges[0].dst);
  }
}

TEST_CASE("bipartite_step needs two tokens when merging") {
  TokenMatrix one(1, 2, {1, 0});
  Rng rng(0);
  try {
    bipartite_step(one, 1, rng, SplitRule::Random);
    FAIL("expected TooFewTokens");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewTokens);
  }
}

TEST_CASE("bipartite_step caps merges at the source count") {
  Rng data_rng(8);
  const auto x = oracle::random_matrix(data_rng, 7, 3);
  Rng rng(1);
  const auto step = bipartite_step(x, 100, rng, SplitRule::Random);
  CHECK(step.merges.size() == 3);
  CHECK(step.kept.size() == 4);
}

TEST_CASE("split_tokens partitions into floor/ceil halves") {
  for (std::size_t n = 1; n < 40; ++n) {
    Rng rng(n);
    const auto s = split_tokens(n, rng, SplitRule::Random);
    CHECK(s.sources.size() == n / 2);
    CHECK(s.destinations.size() == n - n / 2);
    std::vector<int> seen(n, 0);
    for (auto i : s.sources) ++seen[i];
    for (auto i : s.destinations) ++seen[i];
    for (int v : seen) CHECK(v == 1);
  }
}

TEST_CASE("bipartite_step matches the brute-force oracle on fuzzed inputs") {
  Rng data_rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<std::size_t>(data_rng.uniform_int(2, 32));
    const auto d = static_cast<std::size_t>(data_rng.uniform_int(1, 8));
    const auto x = oracle::random_matrix(data_rng, n, d);
    const auto r = static_cast<std::size_t>(data_rng.uniform_int(0, n));
    const std::uint64_t seed = data_rng.next_u64();

    Rng split_rng(seed);
    const auto split = split_tokens(n, split_rng, SplitRule::Random);
    const auto expected = oracle::brute_force_step(x, split.sources, split.destinations, r);

    Rng rng(seed);
    const auto step = bipartite_step(x, r, rng, SplitRule::Random);
    REQUIRE(step.merges.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
      CHECK(step.merges[i].src == expected[i].src);
      CHECK(step.merges[i].dst == expected[i].dst);
    }
    for (const auto& m : step.merges) {
      CHECK(std::binary_search(split.destinations.begin(), split.destinations.end(), m.dst));
    }
  }
}

TEST_CASE("bipartite_step grouping is scale invariant") {
  Rng data_rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = oracle::random_matrix(data_rng, 24, 6);
    for (float c : {1e-3f, 7.0f, 1e3f}) {
      TokenMatrix scaled = x;
      for (float& v : scaled.data()) v *= c;
      Rng a(trial), b(trial);
      const auto s1 = bipartite_step(x, 9, a, SplitRule::Random);
      const auto s2 = bipartite_step(scaled, 9, b, SplitRule::Random);
      REQUIRE(s1.merges.size() == s2.merges.size());
      for (std::size_t i = 0; i < s1.merges.size(); ++i) {
        CHECK(s1.merges[i].src == s2.merges[i].src);
        CHECK(s1.merges[i].dst == s2.merges[i].dst);
      }
    }
  }
}

TEST_CASE("equal similarities break ties toward lower indices") {
  // Every token identical: all similarities are 1.
  TokenMatrix same(6, 2, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  Rng rng(0);
  const auto step = bipartite_step(same, 2, rng, SplitRule::Alternating);
  REQUIRE(step.merges.size() == 2);
  CHECK(step.merges[0].src == 0);
  CHECK(step.merges[0].dst == 1);
  CHECK(step.merges[1].src == 2);
  CHECK(step.merges[1].dst == 1);
}
