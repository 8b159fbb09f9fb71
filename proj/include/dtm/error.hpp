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

#include <stdexcept>
#include <string>
#include <string_view>

namespace dtm {

// Values are mirrored by dtm_status in dtm.h; keep the two in sync.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  EmptyMatrix = 2,
  NonFinite = 3,
  InvalidRange = 4,
  DimensionMismatch = 5,
  TooFewTokens = 6,
  ScheduleMismatch = 7,
  IndivisibleGrid = 8,
  DegenerateNorm = 9,
  BadMagic = 10,
  BadVersion = 11,
  TruncatedPayload = 12,
  UnsupportedDtype = 13,
  UnsupportedRank = 14,
  TrailingData = 15,
  GridMismatch = 16,
  IoError = 17,
  Internal = 18,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Result of a validation pass that reports instead of throwing.
struct Status {
  ErrorCode code = ErrorCode::Ok;
  std::string message;

  bool ok() const noexcept { return code == ErrorCode::Ok; }
  explicit operator bool() const noexcept { return ok(); }
  void throw_if_error() const {
    if (!ok()) throw Error(code, message);
  }
};

}  // namespace dtm
