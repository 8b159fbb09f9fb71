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
#include <span>
#include <vector>

#include "dtm/matching.hpp"
#include "dtm/morph.hpp"
#include "dtm/rng.hpp"
#include "dtm/scheduler.hpp"
#include "dtm/types.hpp"

namespace dtm {

// Only Cosine has a gradient; the others are accepted for configuration
// round-trips and rejected by the loss kernels.
enum class Distance { Cosine, L1, L2, SmoothL1 };

struct LossReport {
  double total = 0.0;
  std::vector<double> per_group;  // w_i * d(u_hat_i, v_hat_i)
  std::size_t schedule_id = 0;
  std::size_t n_final = 0;
  std::size_t steps = 0;
};

double cosine_distance(std::span<const double> a, std::span<const double> b);
double cosine_distance(std::span<const float> a, std::span<const float> b);

/// Derivative of cosine_distance with respect to `a`. DegenerateNorm when
/// |a| <= eps; zero when |b| <= eps.
std::vector<double> grad_cosine_distance(std::span<const double> a,
                                         std::span<const double> b);

/// Sum over groups of w_i * (1 - cos(u_hat_i, v_hat_i)). A group whose morphed
/// online or target vector has norm <= eps contributes w_i.
template <typename T>
LossReport dtm_loss(const Matrix<T>& online, const Matrix<T>& targets,
                    const MorphingMatrix& m, Distance distance = Distance::Cosine);

/// Gradient of dtm_loss with respect to the online tokens. The group weight
/// cancels the 1/w_i of the mean, so each member gets its group's gradient.
template <typename T>
Matrix<T> dtm_loss_grad(const Matrix<T>& online, const Matrix<T>& targets,
                        const MorphingMatrix& m,
                        Distance distance = Distance::Cosine);

struct ObjectiveResult {
  double total = 0.0;
  TokenMatrix gradient;
  std::vector<LossReport> reports;
  std::vector<MorphSchedule> schedules;
};

/// Draws cfg.n_losses schedules, morphs the targets once per schedule with a
/// forked rng stream and sums the losses and gradients in schedule order.
ObjectiveResult objective(const TokenMatrix& online, const TokenMatrix& targets,
                          const SchedulerConfig& cfg, Rng& rng,
                          SplitRule split, const MorphConfig& mcfg = {});

ObjectiveResult objective_for_schedules(
    const TokenMatrix& online, const TokenMatrix& targets,
    std::span<const MorphSchedule> schedules, Rng& rng, SplitRule split,
    const MorphConfig& mcfg = {});

}  // namespace dtm
