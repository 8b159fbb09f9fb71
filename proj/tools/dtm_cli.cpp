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

// Command-line front end over the C API in dtm.h.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtm/dtm.h"
#include "json.hpp"

namespace {

using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kNumeric = 3 };

struct CliError {
  int exit_code;
  std::string name;
  std::string message;
};

int exit_code_for(dtm_status s) {
  switch (s) {
    case DTM_ERR_NON_FINITE:
    case DTM_ERR_DEGENERATE_NORM:
    case DTM_ERR_TOO_FEW_TOKENS:
    case DTM_ERR_INTERNAL:
      return kNumeric;
    default:
      return kInput;
  }
}

void check(dtm_status s) {
  if (s != DTM_OK) throw CliError{exit_code_for(s), dtm_status_name(s), dtm_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Tensor = std::unique_ptr<dtm_tensor, Deleter<dtm_tensor, dtm_tensor_free>>;
using Morphing =
    std::unique_ptr<dtm_morphing, Deleter<dtm_morphing, dtm_morphing_free>>;
using LossResult =
    std::unique_ptr<dtm_loss_result, Deleter<dtm_loss_result, dtm_loss_free>>;
using Report = std::unique_ptr<dtm_report, Deleter<dtm_report, dtm_report_free>>;

Tensor load(const std::string& path) {
  dtm_tensor* t = nullptr;
  check(dtm_tensor_read(path.c_str(), &t));
  return Tensor(t);
}

void emit(const json& j, const std::string& path = {}) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw CliError{kInput, "IoError", "cannot write " + path};
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag,
                           std::optional<std::uint64_t> fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("DTM_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used, 0);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw CliError{kUsage, "Usage", std::string("DTM_SEED is not an integer: ") + env};
  }
  if (fallback) return *fallback;
  throw CliError{kUsage, "Usage", "--seed is required (or set DTM_SEED)"};
}

struct MorphFlags {
  std::size_t n_min = 1;
  std::size_t k_max = 14;
  std::size_t n_final = 0;
  std::string split = "random";
  std::string mode = "sizeweighted";

  void add_to(CLI::App* app) {
    app->add_option("--n-min", n_min, "Minimum final token count")->check(CLI::PositiveNumber);
    app->add_option("--k-max", k_max, "Maximum morphing iterations")->check(CLI::PositiveNumber);
    app->add_option("--n-final", n_final, "Pin the final token count instead of sampling it");
    app->add_option("--split", split, "Bipartite split rule")
        ->check(CLI::IsMember({"random", "alternating"}));
    app->add_option("--mode", mode, "Intermediate mean")
        ->check(CLI::IsMember({"sizeweighted", "paperliteral"}));
  }

  dtm_scheduler_config config(std::size_t n_losses = 1) const {
    dtm_scheduler_config cfg;
    dtm_scheduler_config_init(&cfg);
    cfg.n_min = n_min;
    cfg.k_max = k_max;
    cfg.n_final = n_final;
    cfg.n_losses = n_losses;
    return cfg;
  }
  dtm_split split_rule() const {
    return split == "alternating" ? DTM_SPLIT_ALTERNATING : DTM_SPLIT_RANDOM;
  }
  dtm_mean_mode mean_mode() const {
    return mode == "paperliteral" ? DTM_MEAN_PAPER_LITERAL : DTM_MEAN_SIZE_WEIGHTED;
  }
};

json morphing_json(const dtm_morphing* m) {
  const std::size_t n = dtm_morphing_n_tokens(m);
  const std::size_t g = dtm_morphing_n_groups(m);
  const uint32_t* a = dtm_morphing_assignment(m);
  const uint32_t* w = dtm_morphing_weights(m);
  const uint64_t* c = dtm_morphing_schedule_counts(m);
  json j;
  j["n"] = n;
  j["n_groups"] = g;
  j["assignment"] = std::vector<uint32_t>(a, a + n);
  j["weights"] = std::vector<uint32_t>(w, w + g);
  j["schedule"] = {
      {"n_final", dtm_morphing_schedule_n_final(m)},
      {"k", dtm_morphing_schedule_steps(m)},
      {"counts", std::vector<uint64_t>(c, c + dtm_morphing_schedule_steps(m))}};
  return j;
}

std::size_t square_side(std::size_t n) {
  const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (side * side != n) {
    throw CliError{kInput, "GridMismatch",
                   std::to_string(n) + " tokens are not a square grid; pass --grid-h/--grid-w"};
  }
  return side;
}

json report_json(const dtm_report* r) {
  const uint32_t* labels = dtm_report_labels(r);
  json j;
  j["per_token_labels"] = std::vector<uint32_t>(labels, labels + dtm_report_n_tokens(r));
  j["ensemble_label"] = dtm_report_ensemble_label(r);
  if (dtm_report_agreement(r) >= 0) j["agreement"] = dtm_report_agreement(r);
  if (dtm_report_has_reference(r)) j["mean_ref_cosine"] = dtm_report_mean_ref_cosine(r);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic token morphing: grouping, loss, analysis and benchmarks"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;

  // morph
  auto* morph_cmd = app.add_subcommand("morph", "Sample a schedule and morph target tokens");
  std::string targets_path, out_matrix, out_map;
  std::size_t grid_h = 0, grid_w = 0;
  MorphFlags morph_flags;
  morph_cmd->add_option("--targets", targets_path, "Target token tensor")->required();
  morph_cmd->add_option("--seed", seed, "RNG seed (falls back to DTM_SEED)");
  morph_flags.add_to(morph_cmd);
  morph_cmd->add_option("--out-matrix", out_matrix, "Assignment JSON path (default stdout)");
  morph_cmd->add_option("--out-map", out_map, "Group map PPM path");
  morph_cmd->add_option("--grid-h", grid_h, "Token grid height for --out-map");
  morph_cmd->add_option("--grid-w", grid_w, "Token grid width for --out-map");

  // loss
  auto* loss_cmd = app.add_subcommand("loss", "Multi-schedule morphed-token loss and gradient");
  std::string online_path, out_grad;
  std::size_t n_losses = 2;
  MorphFlags loss_flags;
  loss_cmd->add_option("--online", online_path, "Online token tensor")->required();
  loss_cmd->add_option("--targets", targets_path, "Target token tensor")->required();
  loss_cmd->add_option("--seed", seed, "RNG seed (falls back to DTM_SEED)");
  loss_cmd->add_option("--L", n_losses, "Number of schedules")->check(CLI::PositiveNumber);
  loss_flags.add_to(loss_cmd);
  loss_cmd->add_option("--out-grad", out_grad, "Gradient tensor path");

  // analyze
  auto* analyze_cmd =
      app.add_subcommand("analyze", "Spatial-consistency report, raw vs aggregated tokens");
  std::string tokens_path, classes_path, reference_path;
  std::optional<std::uint64_t> morph_seed;
  std::optional<std::int64_t> truth;
  std::optional<std::size_t> analyze_n_final;
  std::size_t analyze_k_max = 14;
  analyze_cmd->add_option("--tokens", tokens_path, "Token tensor")->required();
  analyze_cmd->add_option("--classes", classes_path, "Class embedding tensor")->required();
  analyze_cmd->add_option("--morph-seed", morph_seed, "Morph RNG seed (falls back to DTM_SEED, then 0)");
  analyze_cmd->add_option("--truth", truth, "Ground-truth class id")->check(CLI::NonNegativeNumber);
  analyze_cmd->add_option("--reference", reference_path, "Reference vector tensor");
  analyze_cmd->add_option("--n-final", analyze_n_final, "Final token count (default N/2)");
  analyze_cmd->add_option("--k-max", analyze_k_max, "Maximum morphing iterations")
      ->check(CLI::PositiveNumber);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Time one grouping variant");
  std::size_t bench_n = 196, bench_d = 768, bench_reps = 50, bench_k = 2;
  std::string variant = "bipartite";
  bench_cmd->add_option("--n", bench_n, "Token count");
  bench_cmd->add_option("--d", bench_d, "Feature dimension");
  bench_cmd->add_option("--variant", variant, "Grouping variant")
      ->check(CLI::IsMember({"bipartite", "kmeans", "downsample"}));
  bench_cmd->add_option("--reps", bench_reps, "Timed repetitions (>= 30)");
  bench_cmd->add_option("--k", bench_k, "Bipartite iterations")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", seed, "RNG seed (falls back to DTM_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "Usage"}, {"message", e.what()}, {"exit_code", kUsage}}.dump()
              << "\n";
    return kUsage;
  }

  try {
    if (morph_cmd->parsed()) {
      const Tensor targets = load(targets_path);
      const auto cfg = morph_flags.config();
      dtm_morphing* raw = nullptr;
      check(dtm_morph(targets.get(), resolve_seed(seed, std::nullopt), &cfg,
                      morph_flags.split_rule(), morph_flags.mean_mode(), &raw));
      const Morphing m(raw);
      if (!out_map.empty()) {
        std::size_t h = grid_h, w = grid_w;
        if (h == 0 || w == 0) h = w = square_side(dtm_morphing_n_tokens(m.get()));
        check(dtm_render_group_map(m.get(), h, w, out_map.c_str()));
      }
      emit(morphing_json(m.get()), out_matrix);
    } else if (loss_cmd->parsed()) {
      const Tensor online = load(online_path);
      const Tensor targets = load(targets_path);
      const auto cfg = loss_flags.config(n_losses);
      dtm_loss_result* raw = nullptr;
      check(dtm_objective(online.get(), targets.get(), resolve_seed(seed, std::nullopt), &cfg,
                          loss_flags.split_rule(), loss_flags.mean_mode(), &raw));
      const LossResult r(raw);
      json per = json::array();
      for (std::size_t i = 0; i < dtm_loss_n_schedules(r.get()); ++i) {
        per.push_back({{"schedule_id", i},
                       {"n_final", dtm_loss_schedule_n_final(r.get(), i)},
                       {"k", dtm_loss_schedule_steps(r.get(), i)},
                       {"total", dtm_loss_schedule_total(r.get(), i)}});
      }
      const dtm_tensor* grad = dtm_loss_gradient(r.get());
      const float* g = dtm_tensor_data(grad);
      double sq = 0.0;
      for (std::size_t i = 0; i < dtm_tensor_rows(grad) * dtm_tensor_cols(grad); ++i) {
        sq += static_cast<double>(g[i]) * g[i];
      }
      if (!out_grad.empty()) check(dtm_tensor_write(grad, out_grad.c_str()));
      emit({{"total", dtm_loss_total(r.get())}, {"per_schedule", per}, {"grad_norm", std::sqrt(sq)}});
    } else if (analyze_cmd->parsed()) {
      const Tensor tokens = load(tokens_path);
      const Tensor classes = load(classes_path);
      Tensor reference;
      if (!reference_path.empty()) reference = load(reference_path);
      const std::size_t n = dtm_tensor_rows(tokens.get());

      dtm_scheduler_config cfg;
      dtm_scheduler_config_init(&cfg);
      cfg.k_max = analyze_k_max;
      cfg.n_final = analyze_n_final ? *analyze_n_final : std::max<std::size_t>(n / 2, 1);
      dtm_morphing* raw_m = nullptr;
      check(dtm_morph(tokens.get(), resolve_seed(morph_seed, 0), &cfg, DTM_SPLIT_RANDOM,
                      DTM_MEAN_SIZE_WEIGHTED, &raw_m));
      const Morphing m(raw_m);

      const std::int64_t truth_id = truth ? *truth : -1;
      dtm_report* raw_report = nullptr;
      check(dtm_analyze(tokens.get(), classes.get(), nullptr, truth_id, reference.get(),
                        &raw_report));
      const Report plain(raw_report);
      dtm_report* agg_report = nullptr;
      check(dtm_analyze(tokens.get(), classes.get(), m.get(), truth_id, reference.get(),
                        &agg_report));
      const Report aggregated(agg_report);
      emit({{"raw", report_json(plain.get())},
            {"aggregated", report_json(aggregated.get())},
            {"morph",
             {{"n_final", dtm_morphing_schedule_n_final(m.get())},
              {"k", dtm_morphing_schedule_steps(m.get())}}}});
    } else if (bench_cmd->parsed()) {
      const dtm_bench_variant v = variant == "kmeans"       ? DTM_BENCH_KMEANS
                                  : variant == "downsample" ? DTM_BENCH_DOWNSAMPLE
                                                            : DTM_BENCH_BIPARTITE;
      dtm_bench_result result{};
      check(dtm_bench(v, bench_n, bench_d, bench_k, bench_reps, resolve_seed(seed, std::nullopt),
                      &result));
      emit({{"median_us", result.median_us}, {"p90_us", result.p90_us}, {"reps", result.reps}});
    }
  } catch (const CliError& e) {
    std::cerr << json{{"error", e.name}, {"message", e.message}, {"exit_code", e.exit_code}}.dump()
              << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "Internal"}, {"message", e.what()}, {"exit_code", kNumeric}}.dump()
              << "\n";
    return kNumeric;
  }
  return kOk;
}
