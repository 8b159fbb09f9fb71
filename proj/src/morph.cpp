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

#include "dtm/morph.hpp"

#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dtm {
namespace {

void check_schedule(const MorphSchedule& schedule, std::size_t n_tokens) {
  const std::size_t removed = std::accumulate(
      schedule.counts.begin(), schedule.counts.end(), std::size_t{0});
  if (schedule.n_tokens != n_tokens || schedule.n_final < 1 ||
      schedule.n_final > n_tokens || schedule.counts.size() != schedule.steps ||
      removed != n_tokens - schedule.n_final) {
    throw Error(ErrorCode::ScheduleMismatch,
                "schedule (N=" + std::to_string(schedule.n_tokens) +
                    ", n_final=" + std::to_string(schedule.n_final) +
                    ", removals=" + std::to_string(removed) +
                    ") does not fit " + std::to_string(n_tokens) + " tokens");
  }
}

// Working set of the iterative morph. Intermediate tokens keep the row of
// the token that founded them; live lists those rows in ascending order.
struct MorphState {
  Matrix64 reps;
  std::vector<std::size_t> live;
  std::vector<std::size_t> sizes;
  std::vector<std::uint32_t> slot_of_token;
};

// Folds one round of merges into the state. Only destinations that absorbed
// a source change. Size-weighted rows are rebuilt as flat means of their
// original tokens; paper-literal rows average the merged rows. On the first
// merge the rows that survive unchanged are widened from the targets.
void apply_step(MorphState& st, const StepMatching& step,
                const TokenMatrix& tokens, IntermediateMean mode, bool fresh) {
  const std::size_t n_tokens = tokens.rows();
  const std::size_t d = st.reps.cols();
  const bool literal = mode == IntermediateMean::PaperLiteral;

  std::vector<std::uint32_t> target(n_tokens);
  std::iota(target.begin(), target.end(), 0U);
  std::vector<std::size_t> members(n_tokens, 0);
  for (const auto& m : step.merges) {
    target[m.src] = static_cast<std::uint32_t>(m.dst);
    st.sizes[m.dst] += st.sizes[m.src];
    members[m.dst] = std::max<std::size_t>(members[m.dst], 1) + 1;
  }
  for (auto& slot : st.slot_of_token) slot = target[slot];
  if (fresh) {
    for (std::size_t i = 0; i < n_tokens; ++i) {
      if (literal || (target[i] == i && members[i] == 0)) {
        kernels::widen(st.reps.row(i).data(), tokens.row(i).data(), d);
      }
    }
  }

  if (!literal) {
    for (std::size_t i = 0; i < n_tokens; ++i) {
      if (members[i] != 0) std::ranges::fill(st.reps.row(i), 0.0);
    }
    for (std::size_t j = 0; j < n_tokens; ++j) {
      const std::uint32_t slot = st.slot_of_token[j];
      if (members[slot] == 0) continue;
      kernels::add_to(st.reps.row(slot).data(), tokens.row(j).data(), d);
    }
    for (std::size_t i = 0; i < n_tokens; ++i) {
      if (members[i] == 0) continue;
      kernels::scale(st.reps.row(i).data(),
                     1.0 / static_cast<double>(st.sizes[i]), d);
    }
  } else {
    for (const auto& m : step.merges) {
      kernels::add_to(st.reps.row(m.dst).data(), st.reps.row(m.src).data(), d);
    }
    for (std::size_t i = 0; i < n_tokens; ++i) {
      if (members[i] == 0) continue;
      const double count = static_cast<double>(members[i]);
      for (double& v : st.reps.row(i)) v /= count;
    }
  }
  std::erase_if(st.live, [&](std::size_t i) { return target[i] != i; });
}

// With pack unset the representatives keep one row per target and only the
// live rows hold intermediates; callers that discard them skip the packing.
MorphResult morph_impl(const TokenMatrix& targets,
                       const MorphSchedule& schedule, Rng& rng,
                       SplitRule split, const MorphConfig& cfg,
                       MorphWorkspace& ws, bool pack) {
  validate_token_matrix(targets).throw_if_error();
  const std::size_t n_tokens = targets.rows();
  const std::size_t d = targets.cols();
  check_schedule(schedule, n_tokens);

  // Until the first merge the intermediates are the targets themselves.
  bool fresh = true;
  MorphState st;
  ws.reps.resize(n_tokens * d);
  st.reps = Matrix64(n_tokens, d, std::move(ws.reps));
  st.live.resize(n_tokens);
  std::iota(st.live.begin(), st.live.end(), std::size_t{0});
  st.sizes.assign(n_tokens, 1);
  st.slot_of_token.resize(n_tokens);
  std::iota(st.slot_of_token.begin(), st.slot_of_token.end(), 0U);

  for (std::size_t p = 0; p < schedule.steps; ++p) {
    std::size_t remaining = schedule.counts[p];
    // One round removes at most floor(n/2) tokens; keep matching until the
    // iteration's quota is met.
    while (remaining > 0) {
      const std::size_t n = st.live.size();
      if (n < 2) {
        throw Error(ErrorCode::TooFewTokens,
                    "bipartite step needs at least 2 tokens, got " +
                        std::to_string(n));
      }
      BipartiteSplit pairs = split_tokens(n, rng, split);
      for (auto& i : pairs.sources) i = st.live[i];
      for (auto& i : pairs.destinations) i = st.live[i];
      const StepMatching step = fresh ? match_split(targets, remaining, pairs)
                                      : match_split(st.reps, remaining, pairs);
      if (step.merges.empty()) {
        throw Error(ErrorCode::Internal, "bipartite round made no progress");
      }
      remaining -= step.merges.size();
      apply_step(st, step, targets, cfg.intermediate_mean, fresh);
      fresh = false;
    }
  }
  if (fresh) {
    kernels::widen(st.reps.data().data(), targets.values().data(),
                   n_tokens * d);
  }

  // Number the surviving rows in order.
  std::vector<std::uint32_t> rank(n_tokens, 0);
  for (std::size_t k = 0; k < st.live.size(); ++k) {
    const std::size_t i = st.live[k];
    rank[i] = static_cast<std::uint32_t>(k);
    if (pack && i != k) std::ranges::copy(st.reps.row(i), st.reps.row(k).begin());
  }
  if (pack) st.reps.truncate_rows(st.live.size());
  for (auto& slot : st.slot_of_token) slot = rank[slot];

  MorphResult result{MorphingMatrix::from_assignment(std::move(st.slot_of_token)),
                     std::move(st.reps)};
  if (result.matrix.n_groups() != schedule.n_final) {
    throw Error(ErrorCode::Internal, "morph produced " +
                                         std::to_string(result.matrix.n_groups()) +
                                         " groups, expected " +
                                         std::to_string(schedule.n_final));
  }
  return result;
}

}  // namespace

MorphResult morph_detailed(const TokenMatrix& targets,
                           const MorphSchedule& schedule, Rng& rng,
                           SplitRule split, const MorphConfig& cfg) {
  MorphWorkspace ws;
  return morph_impl(targets, schedule, rng, split, cfg, ws, true);
}

MorphingMatrix morph(const TokenMatrix& targets, const MorphSchedule& schedule,
                     Rng& rng, SplitRule split, const MorphConfig& cfg) {
  return morph_detailed(targets, schedule, rng, split, cfg).matrix;
}

MorphingMatrix morph(const TokenMatrix& targets, const MorphSchedule& schedule,
                     Rng& rng, SplitRule split, const MorphConfig& cfg,
                     MorphWorkspace& workspace) {
  MorphResult result = morph_impl(targets, schedule, rng, split, cfg, workspace, false);
  workspace.reps = std::move(result.representatives).take_values();
  return std::move(result.matrix);
}

template <typename T>
Matrix<T> apply(const MorphingMatrix& m, const Matrix<T>& tokens) {
  if (tokens.rows() != m.n_tokens()) {
    throw Error(ErrorCode::DimensionMismatch,
                "morphing matrix covers " + std::to_string(m.n_tokens()) +
                    " tokens, got " + std::to_string(tokens.rows()));
  }
  const std::size_t d = tokens.cols();
  const std::size_t n_groups = m.n_groups();
  const auto weights = m.weights();

  // Members of each group in token order, then one small accumulator per group.
  std::vector<std::size_t> start(n_groups + 1, 0);
  for (std::size_t g = 0; g < n_groups; ++g) start[g + 1] = start[g] + weights[g];
  std::vector<std::size_t> order(tokens.rows());
  std::vector<std::size_t> fill(start.begin(), start.end() - 1);
  for (std::size_t j = 0; j < tokens.rows(); ++j) order[fill[m.group_of(j)]++] = j;

  Matrix<T> out(n_groups, d);
  std::vector<double> acc(d);
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::ranges::fill(acc, 0.0);
    for (std::size_t k = start[g]; k < start[g + 1]; ++k) {
      kernels::add_to(acc.data(), tokens.row(order[k]).data(), d);
    }
    kernels::scale_into(out.row(g).data(), acc.data(),
                        1.0 / static_cast<double>(weights[g]), d);
  }
  return out;
}

template <typename T>
Matrix<T> expand(const MorphingMatrix& m, const Matrix<T>& morphed) {
  if (morphed.rows() != m.n_groups()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(m.n_groups()) +
                    " morphed rows, got " + std::to_string(morphed.rows()));
  }
  Matrix<T> out(m.n_tokens(), morphed.cols());
  for (std::size_t j = 0; j < m.n_tokens(); ++j) {
    std::ranges::copy(morphed.row(m.group_of(j)), out.row(j).begin());
  }
  return out;
}

template Matrix<float> apply(const MorphingMatrix&, const Matrix<float>&);
template Matrix<double> apply(const MorphingMatrix&, const Matrix<double>&);
template Matrix<float> expand(const MorphingMatrix&, const Matrix<float>&);
template Matrix<double> expand(const MorphingMatrix&, const Matrix<double>&);

MorphingMatrix kmeans_grouping(const TokenMatrix& features,
                               std::size_t n_groups, std::size_t iters,
                               Rng& rng) {
  validate_token_matrix(features).throw_if_error();
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n_groups < 1 || n_groups > n || iters < 1) {
    throw Error(ErrorCode::InvalidRange,
                "kmeans needs 1 <= n_groups <= " + std::to_string(n) +
                    " and iters >= 1");
  }
  if (n_groups == n) return MorphingMatrix::identity(n);
  if (n_groups == 1) {
    return MorphingMatrix::from_assignment(std::vector<std::uint32_t>(n, 0));
  }

  Matrix64 x = features.cast<double>();
  for (std::size_t j = 0; j < n; ++j) {
    auto row = x.row(j);
    const double norm = std::sqrt(dot64(row, row));
    if (norm > kNormEpsilon) {
      for (double& v : row) v /= norm;
    }
  }

  // D^2-weighted seeding on cosine distance.
  Matrix64 centroids(n_groups, d);
  std::vector<bool> chosen(n, false);
  std::vector<double> dist(n, 0.0);
  auto seed_center = [&](std::size_t k, std::size_t j) {
    chosen[j] = true;
    std::ranges::copy(x.row(j), centroids.row(k).begin());
    for (std::size_t i = 0; i < n; ++i) {
      const double dd = std::max(0.0, 1.0 - dot64(x.row(i), x.row(j)));
      dist[i] = k == 0 ? dd : std::min(dist[i], dd);
    }
  };
  seed_center(0, static_cast<std::size_t>(rng.uniform_int(0, n - 1)));
  for (std::size_t k = 1; k < n_groups; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) total += dist[i] * dist[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        cum += dist[i] * dist[i];
        if (cum > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {  // rounding at the tail
        for (std::size_t i = n; i-- > 0;) {
          if (!chosen[i] && dist[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    }
    if (pick == n) {
      pick = static_cast<std::size_t>(
          std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
    }
    seed_center(k, pick);
  }

  std::vector<std::uint32_t> assign(n, 0);
  std::vector<double> own_sim(n, 0.0);
  std::vector<std::size_t> counts(n_groups, 0);
  for (std::size_t it = 0; it < iters; ++it) {
    bool changed = it == 0;
    std::ranges::fill(counts, 0);
    for (std::size_t j = 0; j < n; ++j) {
      std::uint32_t best = 0;
      double best_sim = dot64(x.row(j), centroids.row(0));
      for (std::size_t k = 1; k < n_groups; ++k) {
        const double s = dot64(x.row(j), centroids.row(k));
        if (s > best_sim) {
          best_sim = s;
          best = static_cast<std::uint32_t>(k);
        }
      }
      changed |= assign[j] != best;
      assign[j] = best;
      own_sim[j] = best_sim;
      ++counts[best];
    }

    // Empty clusters take the point farthest from its centroid.
    for (std::size_t k = 0; k < n_groups; ++k) {
      if (counts[k] != 0) continue;
      std::size_t worst = n;
      for (std::size_t j = 0; j < n; ++j) {
        if (counts[assign[j]] > 1 && (worst == n || own_sim[j] < own_sim[worst])) {
          worst = j;
        }
      }
      --counts[assign[worst]];
      assign[worst] = static_cast<std::uint32_t>(k);
      counts[k] = 1;
      own_sim[worst] = 1.0;
      std::ranges::copy(x.row(worst), centroids.row(k).begin());
      changed = true;
    }
    if (!changed) break;

    Matrix64 sums(n_groups, d);
    for (std::size_t j = 0; j < n; ++j) {
      auto acc = sums.row(assign[j]);
      const auto row = x.row(j);
      for (std::size_t c = 0; c < d; ++c) acc[c] += row[c];
    }
    for (std::size_t k = 0; k < n_groups; ++k) {
      auto row = sums.row(k);
      const double norm = std::sqrt(dot64(row, row));
      if (norm <= kNormEpsilon) continue;
      auto c = centroids.row(k);
      for (std::size_t i = 0; i < d; ++i) c[i] = row[i] / norm;
    }
  }

  std::vector<std::uint32_t> relabel(n_groups, UINT32_MAX);
  std::uint32_t next = 0;
  for (auto& g : assign) {
    if (relabel[g] == UINT32_MAX) relabel[g] = next++;
    g = relabel[g];
  }
  return MorphingMatrix::from_assignment(std::move(assign));
}

MorphingMatrix downsample_grouping(std::size_t grid_h, std::size_t grid_w,
                                   std::size_t factor) {
  if (grid_h == 0 || grid_w == 0) {
    throw Error(ErrorCode::InvalidRange, "empty grid");
  }
  if (factor == 0 || grid_h % factor != 0 || grid_w % factor != 0) {
    throw Error(ErrorCode::IndivisibleGrid,
                std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                    " grid is not divisible by " + std::to_string(factor));
  }
  const std::size_t blocks_w = grid_w / factor;
  std::vector<std::uint32_t> ids(grid_h * grid_w);
  for (std::size_t y = 0; y < grid_h; ++y) {
    for (std::size_t x = 0; x < grid_w; ++x) {
      ids[y * grid_w + x] =
          static_cast<std::uint32_t>((y / factor) * blocks_w + x / factor);
    }
  }
  return MorphingMatrix::from_assignment(std::move(ids));
}

}  // namespace dtm
