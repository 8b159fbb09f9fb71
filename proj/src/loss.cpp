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

#include "dtm/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dtm {
namespace {

template <typename T>
void check_loss_inputs(const Matrix<T>& online, const Matrix<T>& targets,
                       const MorphingMatrix& m, Distance distance) {
  if (distance != Distance::Cosine) {
    throw Error(ErrorCode::InvalidArgument,
                "only the cosine distance is implemented");
  }
  if (online.rows() != targets.rows() || online.cols() != targets.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "online " + std::to_string(online.rows()) + "x" +
                    std::to_string(online.cols()) + " vs targets " +
                    std::to_string(targets.rows()) + "x" +
                    std::to_string(targets.cols()));
  }
  validate_token_matrix(online).throw_if_error();
  validate_token_matrix(targets).throw_if_error();
  if (m.n_tokens() != online.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "morphing matrix covers " + std::to_string(m.n_tokens()) +
                    " tokens, got " + std::to_string(online.rows()));
  }
}

double norm(std::span<const double> v) { return std::sqrt(dot64(v, v)); }

}  // namespace

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  return 1.0 - cosine_similarity(a, b);
}

double cosine_distance(std::span<const float> a, std::span<const float> b) {
  return 1.0 - cosine_similarity(a, b);
}

std::vector<double> grad_cosine_distance(std::span<const double> a,
                                         std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "gradient of mismatched vectors");
  }
  const double na = norm(a);
  if (na <= kNormEpsilon) {
    throw Error(ErrorCode::DegenerateNorm, "|a| is below epsilon");
  }
  std::vector<double> g(a.size(), 0.0);
  const double nb = norm(b);
  if (nb <= kNormEpsilon) return g;
  const double ab = dot64(a, b);
  const double inv = 1.0 / (na * nb);
  const double coef = ab / (na * na * na * nb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    g[i] = -(b[i] * inv - coef * a[i]);
  }
  return g;
}

template <typename T>
LossReport dtm_loss(const Matrix<T>& online, const Matrix<T>& targets,
                    const MorphingMatrix& m, Distance distance) {
  check_loss_inputs(online, targets, m, distance);
  const Matrix64 u = apply(m, online.template cast<double>());
  const Matrix64 v = apply(m, targets.template cast<double>());

  LossReport report;
  report.n_final = m.n_groups();
  report.per_group.resize(m.n_groups());
  const auto weights = m.weights();
  for (std::size_t i = 0; i < m.n_groups(); ++i) {
    const double nu = norm(u.row(i));
    const double nv = norm(v.row(i));
    double dist = 1.0;
    if (nu > kNormEpsilon && nv > kNormEpsilon) {
      dist = 1.0 - dot64(u.row(i), v.row(i)) / (nu * nv);
    }
    report.per_group[i] = static_cast<double>(weights[i]) * dist;
    report.total += report.per_group[i];
  }
  return report;
}

template <typename T>
Matrix<T> dtm_loss_grad(const Matrix<T>& online, const Matrix<T>& targets,
                        const MorphingMatrix& m, Distance distance) {
  check_loss_inputs(online, targets, m, distance);
  const Matrix64 u = apply(m, online.template cast<double>());
  const Matrix64 v = apply(m, targets.template cast<double>());

  Matrix64 group_grad(m.n_groups(), online.cols());
  for (std::size_t i = 0; i < m.n_groups(); ++i) {
    if (norm(u.row(i)) <= kNormEpsilon || norm(v.row(i)) <= kNormEpsilon) {
      continue;
    }
    const auto g = grad_cosine_distance(u.row(i), v.row(i));
    std::ranges::copy(g, group_grad.row(i).begin());
  }
  return expand(m, group_grad).template cast<T>();
}

template LossReport dtm_loss(const Matrix<float>&, const Matrix<float>&,
                             const MorphingMatrix&, Distance);
template LossReport dtm_loss(const Matrix<double>&, const Matrix<double>&,
                             const MorphingMatrix&, Distance);
template Matrix<float> dtm_loss_grad(const Matrix<float>&, const Matrix<float>&,
                                     const MorphingMatrix&, Distance);
template Matrix<double> dtm_loss_grad(const Matrix<double>&,
                                      const Matrix<double>&,
                                      const MorphingMatrix&, Distance);

ObjectiveResult objective_for_schedules(
    const TokenMatrix& online, const TokenMatrix& targets,
    std::span<const MorphSchedule> schedules, Rng& rng, SplitRule split,
    const MorphConfig& mcfg) {
  if (online.rows() != targets.rows() || online.cols() != targets.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "online and target token matrices differ in shape");
  }
  const Matrix64 online64 = online.cast<double>();
  const Matrix64 targets64 = targets.cast<double>();

  ObjectiveResult result;
  Matrix64 grad(online.rows(), online.cols());
  for (std::size_t l = 0; l < schedules.size(); ++l) {
    Rng stream = rng.fork();
    const MorphingMatrix m = morph(targets, schedules[l], stream, split, mcfg);
    LossReport report = dtm_loss(online64, targets64, m);
    report.schedule_id = l;
    report.steps = schedules[l].steps;
    const Matrix64 g = dtm_loss_grad(online64, targets64, m);
    auto acc = grad.data();
    const auto add = g.data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += add[i];
    result.total += report.total;
    result.reports.push_back(std::move(report));
    result.schedules.push_back(schedules[l]);
  }
  result.gradient = grad.cast<float>();
  return result;
}

ObjectiveResult objective(const TokenMatrix& online, const TokenMatrix& targets,
                          const SchedulerConfig& cfg, Rng& rng,
                          SplitRule split, const MorphConfig& mcfg) {
  const auto schedules = sample_schedules(rng, targets.rows(), cfg);
  return objective_for_schedules(online, targets, schedules, rng, split, mcfg);
}

}  // namespace dtm
