// Copyright 2026 The Subzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "subzero/csv.hpp"
#include "subzero/errors.hpp"
#include "subzero/harness.hpp"
#include "subzero/io.hpp"
#include "test_util.hpp"

using namespace subzero;
using subzero::testing::TempDir;

namespace {

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& p) {
  std::istringstream in(io::read_file(p));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string lookup(const io::KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv) {
    if (k == key) return v;
  }
  return "<missing>";
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("hessian file roundtrip") {
    TempDir dir("io_hessian");
    HessianSpec s;
    s.dim = 32;
    s.rank = 6;
    s.num_blocks = 4;
    s.max_eigenvalues = {1, 2, 3, 4};
    s.seed = 3;
    const Hessian h = generate_hessian(s);
    io::save_hessian(dir.path() / "h.bin", h);
    const Hessian back = io::load_hessian(dir.path() / "h.bin");
    CHECK(back.matrix == h.matrix);
    CHECK(back.num_blocks == 4);
    CHECK(back.rank == 6);
    CHECK(std::filesystem::file_size(dir.path() / "h.bin") == 8 + 3 * 8 + 32 * 32 * 8);
  }

  TEST_CASE("corrupt hessian files are rejected") {
    TempDir dir("io_corrupt");
    HessianSpec s;
    s.dim = 8;
    s.rank = 2;
    s.seed = 1;
    io::save_hessian(dir.path() / "h.bin", generate_hessian(s));
    std::string bytes = io::read_file(dir.path() / "h.bin");

    std::string bad_magic = bytes;
    bad_magic[0] = 'X';
    io::write_file(dir.path() / "magic.bin", bad_magic);
    CHECK_THROWS_AS(io::load_hessian(dir.path() / "magic.bin"), InputError);

    io::write_file(dir.path() / "short.bin", bytes.substr(0, bytes.size() - 8));
    CHECK_THROWS_AS(io::load_hessian(dir.path() / "short.bin"), InputError);

    // Flip one off-diagonal entry so the matrix is no longer symmetric.
    std::string asym = bytes;
    asym[32 + 8 * 1 + 7] ^= 0x01;
    io::write_file(dir.path() / "asym.bin", asym);
    CHECK_THROWS_AS(io::load_hessian(dir.path() / "asym.bin"), InputError);

    CHECK_THROWS_AS(io::load_hessian(dir.path() / "missing.bin"), InputError);
  }

  TEST_CASE("key-value sidecars") {
    TempDir dir("io_kv");
    std::ostringstream out;
    io::write_key_values(out, {{"a", "1"}, {"b", "x=y"}});
    io::write_file(dir.path() / "m.meta", "# note\n" + out.str());
    const auto kv = io::read_key_values(dir.path() / "m.meta");
    REQUIRE(kv.size() == 2);
    CHECK(kv[1].first == "b");
    CHECK(kv[1].second == "x=y");
  }

  TEST_CASE("hashes and atomic writes") {
    CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(io::hex64(0xabcULL) == "0000000000000abc");
    TempDir dir("io_write");
    io::write_file(dir.path() / "nested" / "f.txt", "hello");
    CHECK(io::read_file(dir.path() / "nested" / "f.txt") == "hello");
    io::write_file(dir.path() / "nested" / "f.txt", "bye");
    CHECK(io::read_file(dir.path() / "nested" / "f.txt") == "bye");
  }

  TEST_CASE("manifest detects changed and missing files") {
    TempDir dir("io_manifest");
    io::write_file(dir.path() / "a.csv", "x\n1\n");
    io::write_file(dir.path() / "b.csv", "y\n2\n");
    const auto entries = io::write_manifest(dir.path(), {"a.csv", "b.csv"});
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].bytes == 4);
    CHECK(io::read_manifest(dir.path()).size() == 2);
    CHECK(io::verify_manifest(dir.path()).empty());
    io::write_file(dir.path() / "b.csv", "y\n3\n");
    CHECK(io::verify_manifest(dir.path()) == std::vector<std::string>{"b.csv"});
    std::filesystem::remove(dir.path() / "a.csv");
    CHECK(io::verify_manifest(dir.path()).size() == 2);
  }
}

TEST_SUITE("harness") {
  TEST_CASE("gen-hessian writes a deterministic file and sidecar") {
    TempDir dir("harness_gen");
    harness::GenHessianRequest req;
    req.spec.dim = 256;
    req.spec.rank = 64;
    req.spec.max_eigenvalues = {10.0};
    req.spec.seed = 7;
    req.out = dir.path() / "h1.bin";
    harness::gen_hessian(req);
    req.out = dir.path() / "h2.bin";
    harness::gen_hessian(req);
    CHECK(io::read_file(dir.path() / "h1.bin") == io::read_file(dir.path() / "h2.bin"));
    const auto meta = io::read_key_values(dir.path() / "h1.bin.meta");
    CHECK(std::abs(std::stod(lookup(meta, "lambda_max")) - 10.0) <= 1e-9);
    CHECK(lookup(meta, "numerical_rank") == "64");
    CHECK(lookup(meta, "generator") == "linear");

    req.spec.dim = 1024;
    req.spec.num_blocks = 16;
    req.spec.rank = 16;
    req.hetero_refs = {10, 40, 70, 100};
    req.out = dir.path() / "hetero.bin";
    const Hessian h = harness::gen_hessian(req);
    CHECK(h.num_blocks == 16);
    const auto hm = io::read_key_values(dir.path() / "hetero.bin.meta");
    CHECK(lookup(hm, "numerical_rank") == "256");
    CHECK(lookup(hm, "refs") == "10;40;70;100");
  }

  TEST_CASE("alignment sweep shape, identity Hessian and thread independence") {
    const std::vector<double> ones(64, 1.0);
    const QuadraticObjective id(Hessian{SymMatrix::diagonal(ones), 1, 64});
    harness::AlignmentRequest req;
    req.sranks = {4, 16};
    req.trials = 50;
    req.seed = 5;
    const auto res = harness::measure_alignment(id, req);
    CHECK(res.samples.size() == 3 * 2 * 50);
    REQUIRE(res.groups.size() == 6);
    for (const auto& s : res.samples) CHECK(s.rho == doctest::Approx(s.srank).epsilon(1e-12));
    for (const auto& g : res.groups) CHECK(g.expected == doctest::Approx(g.srank));

    req.threads = 3;
    const auto again = harness::measure_alignment(id, req);
    for (std::size_t i = 0; i < res.samples.size(); ++i) CHECK(again.samples[i].rho == res.samples[i].rho);

    std::ostringstream out;
    harness::write_alignment_summary_csv(out, res.groups);
    CHECK(out.str().rfind("ensemble,srank,count,mean,variance,std_error,min,max,expected\n", 0) == 0);

    req.sranks = {7};
    try {
      harness::measure_alignment(id, req);
      FAIL("expected an input error");
    } catch (const InputError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("d=64") != std::string::npos);
      CHECK(msg.find("s=7") != std::string::npos);
    }
  }

  TEST_CASE("optimize: file naming, manifest, gamma sweep") {
    TempDir dir("harness_opt");
    harness::OptimizeRequest req;
    req.hessian.seed = 1;
    req.ensemble = "low-rank";
    req.gammas = {0.0, 1.0};
    req.seeds = {3, 4};
    req.optim.steps = 1000;
    req.optim.lr = 1e-3;
    req.optim.mu = 1e-4;
    req.threads = 2;
    req.out_dir = dir.path();
    const auto out = harness::run_optimize(req);
    CHECK(out.failures.empty());
    REQUIRE(out.runs.size() == 4);
    for (const auto& name : {"run_seed3_gamma0.csv", "run_seed3_gamma1.csv",
                             "run_seed4_gamma0.csv", "run_seed4_gamma1.meta"}) {
      CHECK(std::filesystem::exists(dir.path() / name));
    }
    const auto rows = read_rows(dir.path() / "run_seed3_gamma1.csv");
    CHECK(rows.size() == 1001);
    CHECK(rows[0][0] == "step");
    CHECK(io::verify_manifest(dir.path()).empty());
    CHECK(io::read_manifest(dir.path()).size() == out.files.size());
    const auto meta = io::read_key_values(dir.path() / "run_seed3_gamma1.meta");
    CHECK(lookup(meta, "gamma") == "1");
    CHECK(lookup(meta, "status") == "completed");

    req.gammas = {0.5};
    req.seeds = {3, 3};
    CHECK_THROWS_AS(harness::run_optimize(req), InputError);
  }

  TEST_CASE("optimize: flip-flop block pattern and zero learning rate") {
    TempDir dir("harness_flip");
    harness::OptimizeRequest req;
    req.method = "mezo-bcd";
    req.num_blocks = 4;
    req.optim.order = BlockOrder::kFlipFlop;
    req.optim.steps = 20;
    req.optim.lr = 0.0;
    req.save_theta = true;
    req.out_dir = dir.path();
    harness::run_optimize(req);
    const auto rows = read_rows(dir.path() / "run_seed0.csv");
    REQUIRE(rows.size() == 21);
    for (std::size_t t = 1; t <= 20; ++t) {
      CHECK(std::stol(rows[t][4]) + 1 ==
            static_cast<long>(update_block_idx(BlockOrder::kFlipFlop, t, 4)));
    }
    const auto theta = read_rows(dir.path() / "run_seed0_theta.csv");
    const auto theta0 = harness::initial_theta(256, 0, true);
    REQUIRE(theta.size() == 257);
    for (std::size_t i = 0; i < 256; ++i) CHECK(std::stod(theta[i + 1][1]) == theta0[i]);
  }

  TEST_CASE("optimize: divergence keeps a partial log") {
    TempDir dir("harness_div");
    harness::OptimizeRequest req;
    req.optim.steps = 500;
    req.optim.lr = 0.5;
    req.optim.divergence_factor = 100;
    req.out_dir = dir.path();
    const auto out = harness::run_optimize(req);
    REQUIRE(out.failures.size() == 1);
    CHECK(out.failures[0].find("diverged") != std::string::npos);
    CHECK(read_rows(dir.path() / "run_seed0.csv").size() < 501);
  }

  TEST_CASE("optimize: logistic objective and input errors") {
    TempDir dir("harness_logistic");
    harness::OptimizeRequest req;
    req.objective = "logistic";
    req.method = "mezo-bcd";
    req.num_blocks = 4;
    req.optim.steps = 10;
    req.out_dir = dir.path();
    const auto out = harness::run_optimize(req);
    CHECK(out.runs[0].log.records.size() == 10);
    CHECK(lookup(out.runs[0].log.metadata, "init") == "zeros");

    req.method = "sgd";
    CHECK_THROWS_AS(harness::run_optimize(req), InputError);
    req.method = "zo-sgd";
    req.gammas = {1.0};
    CHECK_THROWS_AS(harness::run_optimize(req), InputError);
    req.objective = "quadratic";
    req.gammas.clear();
    req.ensemble = "block-sparse";
    req.srank = 48;
    CHECK_THROWS_AS(harness::run_optimize(req), InputError);
  }

  TEST_CASE("small fig1 panels are deterministic across worker counts") {
    TempDir dir("harness_fig1");
    harness::Fig1Config c;
    c.steps = 200;
    c.num_seeds = 2;
    c.rho_draws = 20;
    c.gammas = {0.0, 1.0};
    c.threads = 1;
    const auto a = harness::reproduce_fig1_left(c, dir.path() / "a");
    c.threads = 3;
    const auto b = harness::reproduce_fig1_left(c, dir.path() / "b");
    REQUIRE(a.files == b.files);
    for (const auto& f : a.files) {
      CHECK(io::read_file(dir.path() / "a" / f) == io::read_file(dir.path() / "b" / f));
    }
    CHECK(a.passed());
    const auto curves = read_rows(dir.path() / "a" / "fig1_left_curves.csv");
    CHECK(curves.size() == 1 + 2 * 2 * 200);
    CHECK(io::verify_manifest(dir.path() / "a").empty());
  }

  TEST_CASE("small fig1-right panel") {
    TempDir dir("harness_right");
    harness::Fig1RightConfig c;
    c.dim = 256;
    c.num_blocks = 4;
    c.block_rank = 16;
    c.alignment.sranks = {16, 64};
    c.alignment.trials = 200;
    const auto r = harness::reproduce_fig1_right(c, dir.path());
    CHECK(r.files == std::vector<std::string>{"fig1_right_samples.csv", "fig1_right_summary.csv",
                                              "fig1-right.meta"});
    const auto samples = read_rows(dir.path() / "fig1_right_samples.csv");
    CHECK(samples.size() == 1 + 3 * 2 * 200);
    CHECK(samples[0] == std::vector<std::string>{"ensemble", "srank", "trial", "rho"});
    const auto summary = read_rows(dir.path() / "fig1_right_summary.csv");
    CHECK(summary.size() == 1 + 6);
    const auto meta = io::read_key_values(dir.path() / "fig1-right.meta");
    CHECK(lookup(meta, "verdict") == (r.passed() ? "pass" : "fail"));
  }

  TEST_CASE("cost model panels") {
    TempDir dir("harness_cost");
    const auto mem = harness::reproduce_memory_table(dir.path() / "memory-table");
    CHECK(mem.passed());
    const auto rows = read_rows(dir.path() / "memory-table" / "memory_table.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[1][0] == "mezo");
    CHECK(rows[1][3] == rows[4][3]);
    const auto tr = harness::reproduce_traffic(dir.path() / "traffic");
    CHECK(tr.passed());
    const auto trows = read_rows(dir.path() / "traffic" / "traffic.csv");
    CHECK(trows[0] == std::vector<std::string>{"method", "d", "N", "traffic"});
    CHECK(trows.size() == 1 + 2 * 9);
    CHECK_THROWS_AS(harness::reproduce("fig2", {}), InputError);
    CHECK(harness::panel_names().size() == 5);
  }

  TEST_CASE("logistic study reports accuracy checkpoints") {
    harness::LogisticStudyConfig c;
    c.lrs = {1e-2};
    c.num_seeds = 2;
    c.steps = 1000;
    c.checkpoint = 250;
    c.threads = 2;
    const auto rows = harness::logistic_study(c);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
      CHECK(r.best_accuracy >= r.final_accuracy);
      CHECK(r.best_accuracy > 0.5);
    }
    CHECK(rows[0].run_seed != rows[1].run_seed);
  }
}
