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

#include "dtm/group_map.hpp"

#include <fstream>
#include <string>

namespace dtm {

// 4x4x4 RGB cube visited with stride 37 so neighbouring ids get unrelated
// colors.
Rgb palette_color(std::size_t index) noexcept {
  const std::size_t cell = (index % 64) * 37 % 64;
  const auto level = [](std::size_t v) {
    return static_cast<std::uint8_t>(v * 85);
  };
  return {level(cell & 3), level((cell >> 2) & 3), level((cell >> 4) & 3)};
}

std::string encode_group_map(const MorphingMatrix& m, std::size_t grid_h,
                             std::size_t grid_w) {
  if (grid_h * grid_w != m.n_tokens() || grid_h == 0 || grid_w == 0) {
    throw Error(ErrorCode::GridMismatch,
                std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                    " grid does not cover " + std::to_string(m.n_tokens()) +
                    " tokens");
  }
  std::string out = "P6\n" + std::to_string(grid_w) + " " +
                    std::to_string(grid_h) + "\n255\n";
  out.reserve(out.size() + 3 * m.n_tokens());
  for (std::size_t j = 0; j < m.n_tokens(); ++j) {
    for (std::uint8_t c : palette_color(m.group_of(j))) {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

void render_group_map(const MorphingMatrix& m, std::size_t grid_h,
                      std::size_t grid_w, const std::filesystem::path& path) {
  const std::string bytes = encode_group_map(m, grid_h, grid_w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

}  // namespace dtm
