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
#include <optional>
#include <span>
#include <vector>

#include "dtm/types.hpp"

namespace dtm {

/// C x d class embeddings (e.g. text prompt embeddings), C >= 2.
class ClassEmbeddings {
 public:
  explicit ClassEmbeddings(TokenMatrix rows);

  std::size_t n_classes() const noexcept { return rows_.rows(); }
  std::size_t cols() const noexcept { return rows_.cols(); }
  const TokenMatrix& matrix() const noexcept { return rows_; }

 private:
  TokenMatrix rows_;
};

struct ConsistencyReport {
  std::vector<std::uint32_t> per_token_labels;
  std::uint32_t ensemble_label = 0;
  std::optional<std::size_t> agreement;
  std::optional<double> mean_ref_cosine;
};

/// argmax_c cos(token, class_c) per token; ties resolve to the lowest id.
std::vector<std::uint32_t> tokenwise_predict(const TokenMatrix& tokens,
                                             const ClassEmbeddings& classes);

/// Mean over tokens of the per-class cosine scores, then argmax. With a
/// morphing matrix the tokens are first replaced by expand(apply(tokens)).
std::uint32_t ensemble_predict(const TokenMatrix& tokens,
                               const ClassEmbeddings& classes,
                               const MorphingMatrix* m = nullptr);

std::size_t agreement_count(std::span<const std::uint32_t> labels,
                            std::uint32_t truth) noexcept;

double mean_reference_cosine(const TokenMatrix& tokens,
                             std::span<const float> reference);

ConsistencyReport consistency_report(
    const TokenMatrix& tokens, const ClassEmbeddings& classes,
    const MorphingMatrix* m, std::optional<std::uint32_t> truth,
    std::optional<std::span<const float>> reference);

}  // namespace dtm
