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

#include "dtm/types.hpp"

#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dtm {

template <typename T>
Matrix<T>::Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch,
                "matrix data has " + std::to_string(data_.size()) +
                    " values, expected " + std::to_string(rows_ * cols_));
  }
}

template <typename T>
Status validate_token_matrix(const Matrix<T>& m) {
  if (m.rows() == 0 || m.cols() == 0) {
    return {ErrorCode::EmptyMatrix,
            "token matrix is " + std::to_string(m.rows()) + "x" +
                std::to_string(m.cols())};
  }
  const auto values = m.data();
  if (kernels::all_finite(values.data(), values.size())) return {};
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      return {ErrorCode::NonFinite,
              "non-finite value at index " + std::to_string(i)};
    }
  }
  return {};
}

template class Matrix<float>;
template class Matrix<double>;
template Status validate_token_matrix(const Matrix<float>&);
template Status validate_token_matrix(const Matrix<double>&);

MorphingMatrix MorphingMatrix::from_assignment(
    std::vector<std::uint32_t> assignment) {
  if (assignment.empty()) {
    throw Error(ErrorCode::InvalidArgument, "assignment is empty");
  }
  std::uint32_t max_id = 0;
  for (auto g : assignment) max_id = std::max(max_id, g);
  std::vector<std::uint32_t> weights(static_cast<std::size_t>(max_id) + 1, 0);
  for (auto g : assignment) ++weights[g];
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "group " + std::to_string(i) + " is empty");
    }
  }
  MorphingMatrix m;
  m.assignment_ = std::move(assignment);
  m.weights_ = std::move(weights);
  return m;
}

MorphingMatrix MorphingMatrix::identity(std::size_t n_tokens) {
  std::vector<std::uint32_t> ids(n_tokens);
  for (std::size_t j = 0; j < n_tokens; ++j) {
    ids[j] = static_cast<std::uint32_t>(j);
  }
  return from_assignment(std::move(ids));
}

std::vector<std::uint8_t> MorphingMatrix::to_dense() const {
  std::vector<std::uint8_t> dense(n_groups() * n_tokens(), 0);
  for (std::size_t j = 0; j < n_tokens(); ++j) {
    dense[assignment_[j] * n_tokens() + j] = 1;
  }
  return dense;
}

}  // namespace dtm
