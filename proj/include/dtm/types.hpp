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
#include <span>
#include <vector>

#include "dtm/error.hpp"

namespace dtm {

/// Row-major rows x cols matrix. TokenMatrix (32-bit storage) is the public
/// currency; Matrix64 is used where 64-bit inputs matter, e.g. gradient checks.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T{0}) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<T> row(std::size_t i) noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const T> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }
  T& operator()(std::size_t i, std::size_t j) noexcept {
    return data_[i * cols_ + j];
  }
  T operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }
  const std::vector<T>& values() const noexcept { return data_; }

  /// Drops trailing rows, keeping the allocation.
  void truncate_rows(std::size_t rows) {
    if (rows < rows_) {
      rows_ = rows;
      data_.resize(rows * cols_);
    }
  }

  /// Hands the storage to the caller and leaves an empty matrix.
  std::vector<T> take_values() && {
    rows_ = cols_ = 0;
    return std::move(data_);
  }

  template <typename U>
  Matrix<U> cast() const {
    return Matrix<U>(rows_, cols_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using TokenMatrix = Matrix<float>;
using Matrix64 = Matrix<double>;

/// EmptyMatrix when rows or cols is zero, NonFinite (with the flat index)
/// for the first NaN/Inf entry.
template <typename T>
Status validate_token_matrix(const Matrix<T>& m);

/// Hard assignment of N tokens to n_groups dense, nonempty groups.
class MorphingMatrix {
 public:
  /// Throws InvalidArgument unless ids are dense in [0, max] and every group
  /// is nonempty.
  static MorphingMatrix from_assignment(std::vector<std::uint32_t> assignment);
  static MorphingMatrix identity(std::size_t n_tokens);

  std::size_t n_tokens() const noexcept { return assignment_.size(); }
  std::size_t n_groups() const noexcept { return weights_.size(); }
  std::uint32_t group_of(std::size_t token) const noexcept {
    return assignment_[token];
  }
  std::span<const std::uint32_t> assignment() const noexcept {
    return assignment_;
  }
  std::span<const std::uint32_t> weights() const noexcept { return weights_; }

  /// Dense 0/1 form, n_groups x n_tokens, row-major.
  std::vector<std::uint8_t> to_dense() const;

  friend bool operator==(const MorphingMatrix&,
                         const MorphingMatrix&) = default;

 private:
  MorphingMatrix() = default;

  std::vector<std::uint32_t> assignment_;
  std::vector<std::uint32_t> weights_;
};

struct MorphSchedule {
  std::size_t n_tokens = 0;
  std::size_t n_final = 0;
  std::size_t steps = 0;
  std::vector<std::size_t> counts;

  friend bool operator==(const MorphSchedule&, const MorphSchedule&) = default;
};

struct Merge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double similarity = 0.0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

/// One bipartite round over the current token set (local indices).
struct StepMatching {
  std::vector<Merge> merges;
  std::vector<std::size_t> kept;

  friend bool operator==(const StepMatching&, const StepMatching&) = default;
};

}  // namespace dtm
