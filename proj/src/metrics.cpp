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

#include "dtm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dtm/matching.hpp"
#include "dtm/morph.hpp"

namespace dtm {
namespace {

void check_cols(std::size_t got, std::size_t want) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch,
                "token dimension " + std::to_string(got) +
                    " does not match class dimension " + std::to_string(want));
  }
}

// Row-wise max(|x|, eps) so cosine scores reuse one norm per row.
std::vector<double> guarded_norms(const TokenMatrix& m) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out[i] = std::max(std::sqrt(dot64(m.row(i), m.row(i))), kNormEpsilon);
  }
  return out;
}

std::uint32_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return static_cast<std::uint32_t>(best);
}

// Mean over tokens of cos(token, class_c), one entry per class.
std::vector<double> pooled_scores(const TokenMatrix& tokens,
                                  const ClassEmbeddings& classes) {
  const auto& cls = classes.matrix();
  const auto tok_norm = guarded_norms(tokens);
  const auto cls_norm = guarded_norms(cls);
  std::vector<double> scores(classes.n_classes(), 0.0);
  for (std::size_t j = 0; j < tokens.rows(); ++j) {
    for (std::size_t c = 0; c < cls.rows(); ++c) {
      scores[c] += dot64(tokens.row(j), cls.row(c)) / (tok_norm[j] * cls_norm[c]);
    }
  }
  for (double& s : scores) s /= static_cast<double>(tokens.rows());
  return scores;
}

}  // namespace

ClassEmbeddings::ClassEmbeddings(TokenMatrix rows) : rows_(std::move(rows)) {
  validate_token_matrix(rows_).throw_if_error();
  if (rows_.rows() < 2) {
    throw Error(ErrorCode::InvalidArgument,
                "need at least 2 classes, got " + std::to_string(rows_.rows()));
  }
}

std::vector<std::uint32_t> tokenwise_predict(const TokenMatrix& tokens,
                                             const ClassEmbeddings& classes) {
  check_cols(tokens.cols(), classes.cols());
  const auto& cls = classes.matrix();
  const auto tok_norm = guarded_norms(tokens);
  const auto cls_norm = guarded_norms(cls);
  std::vector<std::uint32_t> labels(tokens.rows());
  std::vector<double> scores(cls.rows());
  for (std::size_t j = 0; j < tokens.rows(); ++j) {
    for (std::size_t c = 0; c < cls.rows(); ++c) {
      scores[c] = dot64(tokens.row(j), cls.row(c)) / (tok_norm[j] * cls_norm[c]);
    }
    labels[j] = argmax(scores);
  }
  return labels;
}

std::uint32_t ensemble_predict(const TokenMatrix& tokens,
                               const ClassEmbeddings& classes,
                               const MorphingMatrix* m) {
  check_cols(tokens.cols(), classes.cols());
  if (m == nullptr) return argmax(pooled_scores(tokens, classes));
  return argmax(pooled_scores(expand(*m, apply(*m, tokens)), classes));
}

std::size_t agreement_count(std::span<const std::uint32_t> labels,
                            std::uint32_t truth) noexcept {
  return static_cast<std::size_t>(std::ranges::count(labels, truth));
}

double mean_reference_cosine(const TokenMatrix& tokens,
                             std::span<const float> reference) {
  check_cols(reference.size(), tokens.cols());
  if (tokens.rows() == 0) {
    throw Error(ErrorCode::EmptyMatrix, "no tokens");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < tokens.rows(); ++j) {
    sum += cosine_similarity(tokens.row(j), reference);
  }
  return sum / static_cast<double>(tokens.rows());
}

ConsistencyReport consistency_report(
    const TokenMatrix& tokens, const ClassEmbeddings& classes,
    const MorphingMatrix* m, std::optional<std::uint32_t> truth,
    std::optional<std::span<const float>> reference) {
  validate_token_matrix(tokens).throw_if_error();
  check_cols(tokens.cols(), classes.cols());
  if (truth && *truth >= classes.n_classes()) {
    throw Error(ErrorCode::InvalidRange,
                "truth class " + std::to_string(*truth) + " out of range");
  }
  const TokenMatrix field = m ? expand(*m, apply(*m, tokens)) : tokens;

  ConsistencyReport report;
  report.per_token_labels = tokenwise_predict(field, classes);
  report.ensemble_label = argmax(pooled_scores(field, classes));
  if (truth) report.agreement = agreement_count(report.per_token_labels, *truth);
  if (reference) report.mean_ref_cosine = mean_reference_cosine(field, *reference);
  return report;
}

}  // namespace dtm
