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

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "dtm/types.hpp"

namespace dtm {

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed 64-entry palette; group g is drawn with palette_color(g % 64).
Rgb palette_color(std::size_t index) noexcept;

/// Binary PPM (P6), one pixel per token in row-major grid order.
std::string encode_group_map(const MorphingMatrix& m, std::size_t grid_h,
                             std::size_t grid_w);

void render_group_map(const MorphingMatrix& m, std::size_t grid_h,
                      std::size_t grid_w, const std::filesystem::path& path);

}  // namespace dtm
