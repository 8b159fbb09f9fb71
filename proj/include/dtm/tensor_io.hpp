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

#include <cstdint>
#include <filesystem>
#include <string>

#include "dtm/types.hpp"

namespace dtm {

// Container layout, all integers little-endian:
//   "DTMT" | u32 version=1 | u32 dtype=1 (f32) | u32 ndim | u64 dims[ndim]
//   | f32 payload, row-major
// Rank 1 reads as a 1 x d matrix; rank 2 as rows x cols.
inline constexpr char kTensorMagic[4] = {'D', 'T', 'M', 'T'};
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::uint32_t kDtypeF32 = 1;

std::string encode_tensor(const TokenMatrix& t);
TokenMatrix decode_tensor(const std::string& bytes);

TokenMatrix read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const TokenMatrix& t);

}  // namespace dtm
