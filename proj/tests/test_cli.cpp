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

// Drives the built CLI binary end to end.

#include <sys/wait.h>

#include <cstdint>
#include <cstring>
#include <limits>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dtm/rng.hpp"
#include "dtm/tensor_io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "dtm_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args, const std::string& env = {}) {
  const auto out = workdir() / "stdout.txt";
  const auto err = workdir() / "stderr.txt";
  const std::string cmd = (env.empty() ? "env -u DTM_SEED " : "env " + env + " ") +
                          std::string(DTM_CLI_PATH) + " " + args + " > " + out.string() +
                          " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// Values are k/64 for small integers k so the fixture is bit-identical everywhere.
dtm::TokenMatrix fixture(std::size_t n, std::size_t d, std::uint64_t seed) {
  dtm::Rng rng(seed);
  dtm::TokenMatrix t(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      t(i, j) = static_cast<float>(static_cast<int>(rng.uniform_int(0, 512)) - 256) / 64.0f;
    }
  }
  return t;
}

std::string write_fixture(const std::string& name, const dtm::TokenMatrix& t) {
  const auto p = workdir() / name;
  dtm::write_tensor(p, t);
  return p.string();
}

void check_golden(const std::string& name, const std::string& actual) {
  const fs::path p = fs::path(DTM_GOLDEN_DIR) / name;
  if (std::getenv("DTM_UPDATE_GOLDEN") != nullptr) {
    std::ofstream(p, std::ios::binary) << actual;
  }
  REQUIRE(fs::exists(p));
  CHECK(slurp(p) == actual);
}

}  // namespace

TEST_CASE("morph output is stable and matches the golden file") {
  const auto targets = write_fixture("t16.dtmt", fixture(16, 4, 11));
  const auto a = run("morph --targets " + targets + " --seed 42");
  const auto b = run("morph --targets " + targets + " --seed 42");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  check_golden("morph_seed42.json", a.out);

  const auto j = json::parse(a.out);
  CHECK(j["n"] == 16);
  CHECK(j["assignment"].size() == 16);
  std::uint64_t total = 0;
  for (const auto& w : j["weights"]) total += w.get<std::uint64_t>();
  CHECK(total == 16);

  const auto env = run("morph --targets " + targets, "DTM_SEED=42");
  CHECK(env.code == 0);
  CHECK(env.out == a.out);
}

TEST_CASE("morph with n-final equal to N is the identity") {
  const auto targets = write_fixture("t9.dtmt", fixture(9, 3, 5));
  const auto r = run("morph --targets " + targets + " --seed 1 --n-final 9 --mode paperliteral");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["n_groups"] == 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(j["assignment"][i] == i);
}

TEST_CASE("morph writes a group map") {
  const auto targets = write_fixture("t16.dtmt", fixture(16, 4, 11));
  const auto map = (workdir() / "map.ppm").string();
  const auto matrix = (workdir() / "m.json").string();
  const auto r = run("morph --targets " + targets + " --seed 3 --out-map " + map +
                     " --out-matrix " + matrix);
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(json::parse(slurp(matrix))["n"] == 16);
  const auto ppm = slurp(map);
  CHECK(ppm.rfind("P6\n4 4\n255\n", 0) == 0);
  CHECK(ppm.size() == std::string("P6\n4 4\n255\n").size() + 48);
}

TEST_CASE("loss output is stable and matches the golden file") {
  const auto online = write_fixture("o25.dtmt", fixture(25, 6, 21));
  const auto targets = write_fixture("t25.dtmt", fixture(25, 6, 22));
  const auto grad = (workdir() / "g.dtmt").string();
  const auto a = run("loss --online " + online + " --targets " + targets +
                     " --seed 9 --L 3 --out-grad " + grad);
  const auto b = run("loss --online " + online + " --targets " + targets + " --seed 9 --L 3");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  check_golden("loss_seed9.json", a.out);
  const auto j = json::parse(a.out);
  CHECK(j["per_schedule"].size() == 3);
  double sum = 0.0;
  for (const auto& s : j["per_schedule"]) sum += s["total"].get<double>();
  CHECK(j["total"].get<double>() == doctest::Approx(sum));
  const auto g = dtm::read_tensor(grad);
  CHECK(g.rows() == 25);
  CHECK(g.cols() == 6);
}

TEST_CASE("analyze reports raw and aggregated predictions") {
  const auto tokens = write_fixture("a16.dtmt", fixture(16, 4, 31));
  const auto classes = write_fixture("c3.dtmt", fixture(3, 4, 32));
  const auto ref = write_fixture("r1.dtmt", fixture(1, 4, 33));
  const auto r = run("analyze --tokens " + tokens + " --classes " + classes +
                     " --truth 1 --reference " + ref + " --morph-seed 4");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["raw"]["per_token_labels"].size() == 16);
  CHECK(j["raw"].contains("agreement"));
  CHECK(j["aggregated"].contains("mean_ref_cosine"));
  CHECK(j["morph"]["n_final"] == 8);
}

TEST_CASE("bench reports timing keys") {
  const auto r = run("bench --n 16 --d 8 --variant downsample --reps 30 --seed 1");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["reps"] == 30);
  CHECK(j.contains("median_us"));
  CHECK(j.contains("p90_us"));
}

TEST_CASE("exit codes and error JSON") {
  const auto targets = write_fixture("t16.dtmt", fixture(16, 4, 11));

  auto r = run("morph --targets " + targets);
  CHECK(r.code == 1);
  CHECK(json::parse(r.err)["error"] == "Usage");
  CHECK(run("frobnicate").code == 1);
  CHECK(run("morph --targets " + targets + " --seed 1 --split diagonal").code == 1);
  CHECK(run("morph --targets " + targets, "DTM_SEED=abc").code == 1);

  r = run("morph --targets /nonexistent.dtmt --seed 1");
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"] == "IoError");

  const auto junk = workdir() / "junk.dtmt";
  std::ofstream(junk, std::ios::binary) << "NOPE0000000000000000";
  r = run("morph --targets " + junk.string() + " --seed 1");
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"] == "BadMagic");

  r = run("morph --targets " + targets + " --seed 1 --n-final 40");
  CHECK(r.code == 2);

  const auto one = write_fixture("one.dtmt", fixture(1, 4, 1));
  r = run("loss --online " + one + " --targets " + one + " --seed 1 --n-final 1");
  CHECK(r.code == 0);

  dtm::TokenMatrix zeros(4, 2);
  const auto zero = write_fixture("zero.dtmt", zeros);
  r = run("loss --online " + zero + " --targets " + zero + " --seed 1");
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["grad_norm"] == 0.0);

  std::string bytes = dtm::encode_tensor(fixture(2, 2, 1));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + bytes.size() - 4, &nan, 4);
  const auto bad = workdir() / "nan.dtmt";
  std::ofstream(bad, std::ios::binary) << bytes;
  r = run("morph --targets " + bad.string() + " --seed 1");
  CHECK(r.code == 3);
  CHECK(json::parse(r.err)["error"] == "NonFinite");
}
