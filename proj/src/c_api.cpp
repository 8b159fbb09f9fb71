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

#include "dtm/dtm.h"

#include <memory>
#include <new>
#include <string>

#include "dtm/bench.hpp"
#include "dtm/group_map.hpp"
#include "dtm/loss.hpp"
#include "dtm/metrics.hpp"
#include "dtm/morph.hpp"
#include "dtm/scheduler.hpp"
#include "dtm/tensor_io.hpp"

struct dtm_tensor {
  dtm::TokenMatrix value;
};

struct dtm_morphing {
  dtm::MorphingMatrix matrix;
  std::size_t n_final = 0;
  std::vector<std::uint64_t> counts;
};

struct dtm_loss_result {
  dtm::ObjectiveResult result;
  dtm_tensor gradient;
};

struct dtm_report {
  dtm::ConsistencyReport report;
};

namespace {

thread_local std::string g_last_error;

dtm_status fail(dtm_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
dtm_status guarded(F&& body) noexcept {
  try {
    body();
    g_last_error.clear();
    return DTM_OK;
  } catch (const dtm::Error& e) {
    return fail(static_cast<dtm_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(DTM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DTM_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) {
    throw dtm::Error(dtm::ErrorCode::InvalidArgument,
                     std::string(what) + " is null");
  }
}

dtm::SchedulerConfig to_config(const dtm_scheduler_config* cfg) {
  dtm::SchedulerConfig out;
  if (cfg == nullptr) return out;
  out.n_min = cfg->n_min;
  out.k_max = cfg->k_max;
  out.n_losses = cfg->n_losses;
  if (cfg->n_final != 0) out.fixed_n_final = cfg->n_final;
  return out;
}

dtm::SplitRule to_split(dtm_split s) {
  switch (s) {
    case DTM_SPLIT_RANDOM: return dtm::SplitRule::Random;
    case DTM_SPLIT_ALTERNATING: return dtm::SplitRule::Alternating;
  }
  throw dtm::Error(dtm::ErrorCode::InvalidArgument, "unknown split rule");
}

dtm::MorphConfig to_morph_config(dtm_mean_mode mode) {
  switch (mode) {
    case DTM_MEAN_SIZE_WEIGHTED:
      return {dtm::IntermediateMean::SizeWeighted};
    case DTM_MEAN_PAPER_LITERAL:
      return {dtm::IntermediateMean::PaperLiteral};
  }
  throw dtm::Error(dtm::ErrorCode::InvalidArgument, "unknown mean mode");
}

}  // namespace

extern "C" {

int dtm_abi_version(void) { return DTM_ABI_VERSION; }

const char* dtm_status_name(dtm_status status) {
  return dtm::error_code_name(static_cast<dtm::ErrorCode>(status)).data();
}

const char* dtm_last_error(void) { return g_last_error.c_str(); }

void dtm_scheduler_config_init(dtm_scheduler_config* cfg) {
  if (cfg == nullptr) return;
  const dtm::SchedulerConfig defaults;
  cfg->n_min = defaults.n_min;
  cfg->k_max = defaults.k_max;
  cfg->n_losses = defaults.n_losses;
  cfg->n_final = 0;
}

dtm_status dtm_tensor_create(size_t rows, size_t cols, const float* data,
                             dtm_tensor** out) {
  return guarded([&] {
    require(out, "out");
    if (rows * cols != 0) require(data, "data");
    auto t = std::make_unique<dtm_tensor>();
    t->value = dtm::TokenMatrix(rows, cols,
                                std::vector<float>(data, data + rows * cols));
    *out = t.release();
  });
}

dtm_status dtm_tensor_read(const char* path, dtm_tensor** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto t = std::make_unique<dtm_tensor>();
    t->value = dtm::read_tensor(path);
    *out = t.release();
  });
}

dtm_status dtm_tensor_write(const dtm_tensor* t, const char* path) {
  return guarded([&] {
    require(t, "tensor");
    require(path, "path");
    dtm::write_tensor(path, t->value);
  });
}

size_t dtm_tensor_rows(const dtm_tensor* t) { return t ? t->value.rows() : 0; }
size_t dtm_tensor_cols(const dtm_tensor* t) { return t ? t->value.cols() : 0; }
const float* dtm_tensor_data(const dtm_tensor* t) {
  return t ? t->value.data().data() : nullptr;
}
void dtm_tensor_free(dtm_tensor* t) { delete t; }

dtm_status dtm_morph(const dtm_tensor* targets, uint64_t seed,
                     const dtm_scheduler_config* cfg, dtm_split split,
                     dtm_mean_mode mode, dtm_morphing** out) {
  return guarded([&] {
    require(targets, "targets");
    require(out, "out");
    dtm::validate_token_matrix(targets->value).throw_if_error();
    dtm::Rng rng(seed);
    const auto schedule =
        dtm::sample_schedule(rng, targets->value.rows(), to_config(cfg));
    auto m = std::make_unique<dtm_morphing>(dtm_morphing{
        dtm::morph(targets->value, schedule, rng, to_split(split),
                   to_morph_config(mode)),
        schedule.n_final,
        std::vector<std::uint64_t>(schedule.counts.begin(),
                                   schedule.counts.end())});
    *out = m.release();
  });
}

dtm_status dtm_morphing_from_assignment(const uint32_t* assignment,
                                        size_t n_tokens, dtm_morphing** out) {
  return guarded([&] {
    require(assignment, "assignment");
    require(out, "out");
    auto matrix = dtm::MorphingMatrix::from_assignment(
        std::vector<std::uint32_t>(assignment, assignment + n_tokens));
    const std::size_t groups = matrix.n_groups();
    *out = new dtm_morphing{std::move(matrix), groups, {}};
  });
}

size_t dtm_morphing_n_tokens(const dtm_morphing* m) {
  return m ? m->matrix.n_tokens() : 0;
}
size_t dtm_morphing_n_groups(const dtm_morphing* m) {
  return m ? m->matrix.n_groups() : 0;
}
const uint32_t* dtm_morphing_assignment(const dtm_morphing* m) {
  return m ? m->matrix.assignment().data() : nullptr;
}
const uint32_t* dtm_morphing_weights(const dtm_morphing* m) {
  return m ? m->matrix.weights().data() : nullptr;
}
size_t dtm_morphing_schedule_n_final(const dtm_morphing* m) {
  return m ? m->n_final : 0;
}
size_t dtm_morphing_schedule_steps(const dtm_morphing* m) {
  return m ? m->counts.size() : 0;
}
const uint64_t* dtm_morphing_schedule_counts(const dtm_morphing* m) {
  return m ? m->counts.data() : nullptr;
}

dtm_status dtm_morphing_apply(const dtm_morphing* m, const dtm_tensor* tokens,
                              dtm_tensor** out) {
  return guarded([&] {
    require(m, "morphing");
    require(tokens, "tokens");
    require(out, "out");
    *out = new dtm_tensor{dtm::apply(m->matrix, tokens->value)};
  });
}

dtm_status dtm_morphing_expand(const dtm_morphing* m, const dtm_tensor* morphed,
                               dtm_tensor** out) {
  return guarded([&] {
    require(m, "morphing");
    require(morphed, "morphed");
    require(out, "out");
    *out = new dtm_tensor{dtm::expand(m->matrix, morphed->value)};
  });
}

dtm_status dtm_render_group_map(const dtm_morphing* m, size_t grid_h,
                                size_t grid_w, const char* path) {
  return guarded([&] {
    require(m, "morphing");
    require(path, "path");
    dtm::render_group_map(m->matrix, grid_h, grid_w, path);
  });
}

void dtm_morphing_free(dtm_morphing* m) { delete m; }

dtm_status dtm_objective(const dtm_tensor* online, const dtm_tensor* targets,
                         uint64_t seed, const dtm_scheduler_config* cfg,
                         dtm_split split, dtm_mean_mode mode,
                         dtm_loss_result** out) {
  return guarded([&] {
    require(online, "online");
    require(targets, "targets");
    require(out, "out");
    dtm::validate_token_matrix(targets->value).throw_if_error();
    dtm::Rng rng(seed);
    auto r = std::make_unique<dtm_loss_result>();
    r->result = dtm::objective(online->value, targets->value, to_config(cfg),
                               rng, to_split(split), to_morph_config(mode));
    r->gradient.value = r->result.gradient;
    *out = r.release();
  });
}

double dtm_loss_total(const dtm_loss_result* r) {
  return r ? r->result.total : 0.0;
}
size_t dtm_loss_n_schedules(const dtm_loss_result* r) {
  return r ? r->result.reports.size() : 0;
}
double dtm_loss_schedule_total(const dtm_loss_result* r, size_t i) {
  return r && i < r->result.reports.size() ? r->result.reports[i].total : 0.0;
}
size_t dtm_loss_schedule_n_final(const dtm_loss_result* r, size_t i) {
  return r && i < r->result.reports.size() ? r->result.reports[i].n_final : 0;
}
size_t dtm_loss_schedule_steps(const dtm_loss_result* r, size_t i) {
  return r && i < r->result.reports.size() ? r->result.reports[i].steps : 0;
}
const dtm_tensor* dtm_loss_gradient(const dtm_loss_result* r) {
  return r ? &r->gradient : nullptr;
}
void dtm_loss_free(dtm_loss_result* r) { delete r; }

dtm_status dtm_analyze(const dtm_tensor* tokens, const dtm_tensor* classes,
                       const dtm_morphing* m, int64_t truth,
                       const dtm_tensor* reference, dtm_report** out) {
  return guarded([&] {
    require(tokens, "tokens");
    require(classes, "classes");
    require(out, "out");
    const dtm::ClassEmbeddings cls(classes->value);
    std::optional<std::uint32_t> truth_id;
    if (truth >= 0) {
      if (static_cast<std::uint64_t>(truth) >= cls.n_classes()) {
        throw dtm::Error(dtm::ErrorCode::InvalidRange,
                         "truth class " + std::to_string(truth) +
                             " out of range");
      }
      truth_id = static_cast<std::uint32_t>(truth);
    }
    std::optional<std::span<const float>> ref;
    if (reference != nullptr) {
      if (reference->value.rows() != 1) {
        throw dtm::Error(dtm::ErrorCode::DimensionMismatch,
                         "reference must be a single vector");
      }
      ref = reference->value.row(0);
    }
    *out = new dtm_report{dtm::consistency_report(
        tokens->value, cls, m ? &m->matrix : nullptr, truth_id, ref)};
  });
}

size_t dtm_report_n_tokens(const dtm_report* r) {
  return r ? r->report.per_token_labels.size() : 0;
}
const uint32_t* dtm_report_labels(const dtm_report* r) {
  return r ? r->report.per_token_labels.data() : nullptr;
}
uint32_t dtm_report_ensemble_label(const dtm_report* r) {
  return r ? r->report.ensemble_label : 0;
}
int64_t dtm_report_agreement(const dtm_report* r) {
  return r && r->report.agreement
             ? static_cast<int64_t>(*r->report.agreement)
             : -1;
}
int dtm_report_has_reference(const dtm_report* r) {
  return r && r->report.mean_ref_cosine ? 1 : 0;
}
double dtm_report_mean_ref_cosine(const dtm_report* r) {
  return r && r->report.mean_ref_cosine ? *r->report.mean_ref_cosine : 0.0;
}
void dtm_report_free(dtm_report* r) { delete r; }

dtm_status dtm_bench(dtm_bench_variant variant, size_t n_tokens, size_t dim,
                     size_t steps, size_t reps, uint64_t seed,
                     dtm_bench_result* out) {
  return guarded([&] {
    require(out, "out");
    if (n_tokens < 2) {
      throw dtm::Error(dtm::ErrorCode::InvalidRange, "bench needs N >= 2");
    }
    dtm::BenchVariant v;
    switch (variant) {
      case DTM_BENCH_BIPARTITE: v = dtm::BenchVariant::Bipartite; break;
      case DTM_BENCH_KMEANS: v = dtm::BenchVariant::KMeans; break;
      case DTM_BENCH_DOWNSAMPLE: v = dtm::BenchVariant::Downsample; break;
      default:
        throw dtm::Error(dtm::ErrorCode::InvalidArgument, "unknown variant");
    }
    const auto schedule = dtm::make_schedule(n_tokens, n_tokens / 2, steps);
    dtm::Rng rng(seed);
    dtm::BenchOptions opts;
    opts.reps = reps;
    const auto summary = dtm::bench_variant(v, n_tokens, dim, schedule, rng, opts);
    out->median_us = summary.median_us;
    out->p90_us = summary.p90_us;
    out->reps = summary.per_rep_us.size();
  });
}

}  // extern "C"
