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
#include <vector>

#include "dtm/matching.hpp"
#include "dtm/rng.hpp"
#include "dtm/types.hpp"

namespace dtm {

enum class IntermediateMean {
  // Intermediate tokens are flat means of every original token they absorbed.
  SizeWeighted,
  // Each step replaces a destination by the unweighted mean of itself and the
  // sources merged into it, as in the reference pseudo-code.
  PaperLiteral,
};

struct MorphConfig {
  IntermediateMean intermediate_mean = IntermediateMean::SizeWeighted;
};

struct MorphResult {
  MorphingMatrix matrix;
  // Final intermediate token representations, one row per group.
  Matrix64 representatives;
};

/// Iterative bipartite morphing of the target tokens following `schedule`.
/// When an iteration asks for more removals than one round can deliver
/// (floor(n/2)), extra rounds run inside the same iteration.
MorphResult morph_detailed(const TokenMatrix& targets,
                           const MorphSchedule& schedule, Rng& rng,
                           SplitRule split, const MorphConfig& cfg = {});

MorphingMatrix morph(const TokenMatrix& targets, const MorphSchedule& schedule,
                     Rng& rng, SplitRule split, const MorphConfig& cfg = {});

/// Scratch buffers kept between morph calls so repeated calls on same-sized
/// inputs do not reallocate.
struct MorphWorkspace {
  std::vector<double> reps;
};

MorphingMatrix morph(const TokenMatrix& targets, const MorphSchedule& schedule,
                     Rng& rng, SplitRule split, const MorphConfig& cfg,
                     MorphWorkspace& workspace);

/// Group means, accumulated in 64-bit.
template <typename T>
Matrix<T> apply(const MorphingMatrix& m, const Matrix<T>& tokens);

/// Broadcasts each group row back to its member tokens.
template <typename T>
Matrix<T> expand(const MorphingMatrix& m, const Matrix<T>& morphed);

/// Spherical k-means with D^2-weighted seeding. Group ids are relabeled in
/// order of first appearance over the tokens.
MorphingMatrix kmeans_grouping(const TokenMatrix& features,
                               std::size_t n_groups, std::size_t iters,
                               Rng& rng);

/// factor x factor spatial blocks over a row-major grid_h x grid_w token grid.
MorphingMatrix downsample_grouping(std::size_t grid_h, std::size_t grid_w,
                                   std::size_t factor);

}  // namespace dtm
