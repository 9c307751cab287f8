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

// Acceptance suite: runs every primary criterion and prints one PASS/FAIL
// line per criterion. Exit status 0 when all pass, 4 otherwise.
//
//   subzero_acceptance [--out DIR] [--threads N] [--only 1,2,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "subzero/analysis.hpp"
#include "subzero/harness.hpp"
#include "subzero/io.hpp"
#include "subzero/parallel.hpp"
#include "subzero/perturbation.hpp"
#include "subzero/rng.hpp"
#include "subzero/zo_optim.hpp"

namespace fs = std::filesystem;
using namespace subzero;

namespace {

// Pinned tolerances.
constexpr double kMeanSe = 3.0;               // criteria 1, 5, 6b
constexpr double kTailAbs = 0.01;             // criterion 2
constexpr double kBand = 0.25;                // criterion 4
constexpr double kVarianceRatio = 2.0;        // criterion 5
constexpr double kExactRel = 1e-9;            // criterion 6a
constexpr double kRoundtrip = 1e-12;          // criterion 7
constexpr double kMhatUlps = 1.0;             // criterion 7
constexpr double kAccuracy = 0.90;            // criterion 9
constexpr double kBudget1 = 30.0, kBudget2 = 30.0, kBudget3 = 60.0, kBudget4 = 300.0,
                 kBudget5 = 30.0, kBudget9 = 120.0;

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  Rng rng(seed);
  rng.fill_normal(v);
  return v;
}

SymMatrix random_psd(std::size_t d, std::size_t rank, std::uint64_t seed) {
  Matrix r(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rank));
  Rng rng(seed);
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    for (Eigen::Index i = 0; i < r.rows(); ++i) r(i, j) = rng.normal();
  }
  return SymMatrix::from_upper(r * r.transpose());
}

QuadraticObjective fig1_quadratic() {
  HessianSpec s;
  s.seed = mix64(0, 0x4e55);
  return QuadraticObjective(generate_hessian(s));
}

struct Context {
  fs::path out;
  std::size_t threads = 1;
  // fig1-right is shared by criteria 1, 5 and 10.
  std::optional<harness::PanelResult> right;
  double right_seconds = 0.0;
};

const harness::PanelResult& fig1_right(Context& ctx) {
  if (!ctx.right) {
    const auto t0 = std::chrono::steady_clock::now();
    harness::ReproduceOptions o;
    o.out_dir = ctx.out / "threads1";
    o.threads = 1;
    ctx.right = harness::reproduce("fig1-right", o);
    ctx.right_seconds = seconds_since(t0);
  }
  return *ctx.right;
}

const harness::Check* find_check(const harness::PanelResult& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

Outcome universality(Context& ctx) {
  const auto& r = fig1_right(ctx);
  const auto* c = find_check(r, "means-match-expected");
  const bool fast = ctx.right_seconds < kBudget1;
  return {c != nullptr && c->passed && fast,
          (c ? c->detail : std::string("check missing")) + " (limit " + fmt(kMeanSe) +
              "); 15 groups x 1000 trials in " + fmt(ctx.right_seconds, 3) + " s"};
}

Outcome block_tail(Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool enumeration_ok = true;
  std::size_t nontrivial = 0;
  Rng pick(2);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::size_t d = std::size_t{16} << pick.below(3);
    const std::size_t n = std::size_t{2} << pick.below(3);
    const std::size_t rank = 1 + pick.below(d);
    const auto part = BlockPartition::equal(d, n);
    // D H D with a random scale per block keeps H PSD and spreads the
    // per-block alignments apart.
    Vector scale(static_cast<Eigen::Index>(d));
    for (std::size_t b = 0; b < n; ++b) {
      const double c = 0.3 + 1.7 * pick.uniform();
      for (std::size_t i = part.block(b).begin; i < part.block(b).end; ++i) {
        scale(static_cast<Eigen::Index>(i)) = c;
      }
    }
    const Matrix base = random_psd(d, rank, mix64(k, 0x7a11)).dense();
    const SymMatrix h = SymMatrix::from_upper(scale.asDiagonal() * base * scale.asDiagonal());
    const QuadraticObjective q(Hessian{h, 1, rank});

    // Oracle: per-block diagonal sums over lambda_max, enumerated directly.
    std::vector<double> block_rho(n);
    for (std::size_t b = 0; b < n; ++b) {
      double s = 0.0;
      for (std::size_t i = part.block(b).begin; i < part.block(b).end; ++i) s += h(i, i);
      block_rho[b] = s / q.lambda_max();
    }
    const auto [lo, hi] = std::minmax_element(block_rho.begin(), block_rho.end());
    const double rho_hat = *lo + (*hi - *lo) * (0.05 + 0.9 * pick.uniform());
    std::size_t good = 0;
    for (double br : block_rho) good += br >= rho_hat ? 1 : 0;
    const double oracle = static_cast<double>(good) / static_cast<double>(n);
    const double exact = block_tail_probability(q, part, rho_hat);
    if (exact != oracle) enumeration_ok = false;
    if (exact > 0.0 && exact < 1.0) ++nontrivial;

    const std::size_t draws = 20000;
    std::size_t hits = 0;
    for (std::size_t t = 0; t < draws; ++t) {
      if (alignment_rho(sample_block_sparse(part, mix64(k, t, 0x7a12)), q) >= rho_hat) ++hits;
    }
    worst = std::max(worst, std::abs(static_cast<double>(hits) / draws - exact));
  }
  const double secs = seconds_since(t0);
  return {worst <= kTailAbs && enumeration_ok && secs < kBudget2,
          "max |empirical - exact| = " + fmt(worst) + " (limit " + fmt(kTailAbs) +
              "), enumeration matches oracle: " + (enumeration_ok ? "yes" : "no") + ", " +
              std::to_string(nontrivial) + "/20 non-trivial, " + fmt(secs, 3) + " s"};
}

Outcome fig1_left(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  harness::ReproduceOptions o;
  o.out_dir = ctx.out;
  o.threads = ctx.threads;
  const auto r = harness::reproduce("fig1-left", o);
  const double secs = seconds_since(t0);
  const auto* c = find_check(r, "final-loss-decreasing");
  return {c != nullptr && c->passed && secs < kBudget3,
          (c ? c->detail : std::string("check missing")) + "; " + fmt(secs, 3) + " s"};
}

Outcome fig1_middle(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  harness::ReproduceOptions o;
  o.out_dir = ctx.out;
  o.threads = ctx.threads;
  const auto r = harness::reproduce("fig1-middle", o);
  const double secs = seconds_since(t0);
  const auto* c = find_check(r, "iterations-times-rho-constant");
  const bool band_pinned = harness::kProportionalityBand == kBand;
  return {c != nullptr && c->passed && band_pinned && secs < kBudget4,
          (c ? c->detail : std::string("check missing")) + "; " + fmt(secs, 4) + " s"};
}

Outcome concentration(Context& ctx) {
  const auto& r = fig1_right(ctx);
  const auto* means = find_check(r, "means-match-expected");
  const auto* ratio = find_check(r, "block-sparse-variance-ratio");
  const bool pinned = harness::kVarianceRatioThreshold == kVarianceRatio &&
                      harness::kMeanMatchSe == kMeanSe;
  return {means != nullptr && ratio != nullptr && means->passed && ratio->passed && pinned &&
              ctx.right_seconds < kBudget5,
          (ratio ? ratio->detail : std::string("ratio check missing")) + "; means: " +
              (means ? means->detail : std::string("missing"))};
}

Outcome estimator(Context&) {
  const QuadraticObjective q = fig1_quadratic();
  const auto part = BlockPartition::equal(256, 4);
  // (a) exactness on 20 points x 3 ensembles per mu.
  std::string per_mu;
  bool exact_ok = true;
  for (double mu : {1e-6, 1e-3, 1e-1}) {
    double worst = 0.0;
    std::size_t over = 0, total = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
      auto theta = normals(256, mix64(k, 0x6a));
      const std::vector<Perturbation> ms{IdentityPerturbation{256}, sample_low_rank(256, 64, k),
                                         sample_block_sparse(part, k)};
      for (const auto& m : ms) {
        const std::uint64_t seed = mix64(k, 0x6b);
        const double g = spsa_gradient(q, theta, m, mu, seed, 0);
        const Vector mu_dir = apply_M(m, direction_stream(seed, 256));
        const Vector h_dir = q.matrix().dense() * mu_dir;
        const double exact = Eigen::Map<const Vector>(theta.data(), 256).dot(h_dir);
        const double rel = std::abs(g - exact) / std::abs(exact);
        worst = std::max(worst, rel);
        ++total;
        if (!(rel <= kExactRel)) ++over;
      }
    }
    if (over > 0) exact_ok = false;
    per_mu += " mu=" + fmt(mu, 1) + ": worst " + fmt(worst, 2) + " (" + std::to_string(over) +
              "/" + std::to_string(total) + " over);";
  }
  // (b) unbiasedness with M = I on a dense 8-dim PSD Hessian.
  const std::size_t d = 8;
  const QuadraticObjective small(Hessian{random_psd(d, d, 0x6c), 1, d});
  auto theta = normals(d, 0x6d);
  const Vector grad = small.gradient(theta);
  const std::size_t n = 50000;
  std::vector<double> sum(d, 0.0), sum2(d, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t seed = mix64(0x6e, k);
    const double g = spsa_gradient(small, theta, IdentityPerturbation{d}, 1e-3, seed, 0);
    const auto u = direction_stream(seed, d);
    for (std::size_t i = 0; i < d; ++i) {
      sum[i] += g * u[i];
      sum2[i] += (g * u[i]) * (g * u[i]);
    }
  }
  double worst_z = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double mean = sum[i] / n;
    const double var = (sum2[i] - n * mean * mean) / (n - 1);
    worst_z = std::max(worst_z, std::abs(mean - grad(static_cast<Eigen::Index>(i))) /
                                    std::sqrt(var / n));
  }
  const bool unbiased = worst_z <= kMeanSe;
  return {exact_ok && unbiased, "(a) relative error vs theta^T H M u, limit " +
                                    fmt(kExactRel, 1) + ":" + per_mu +
                                    " (b) worst |mean - H theta| / SE = " + fmt(worst_z, 3) +
                                    " over 50000 draws (limit " + fmt(kMeanSe) + ")"};
}

Outcome fidelity(Context&) {
  std::vector<std::string> failures;
  // Roundtrip.
  const auto theta0 = normals(1000, 0x71);
  auto theta = theta0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    perturb_parameters(theta, 1e-3, s);
    perturb_parameters(theta, -2e-3, s);
    perturb_parameters(theta, 1e-3, s);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      worst = std::max(worst, std::abs(theta[i] - theta0[i]));
    }
    theta = theta0;
  }
  if (!(worst <= kRoundtrip)) failures.push_back("roundtrip " + fmt(worst));

  // Block isolation for every order and for block-local Adam.
  const QuadraticObjective q = fig1_quadratic();
  const auto part = BlockPartition::equal(256, 8);
  std::size_t steps = 0, violations = 0;
  auto probe = [&](const StepEvent& e) {
    ++steps;
    const auto r = part.block(static_cast<std::size_t>(e.active_block));
    for (std::size_t i = 0; i < e.before.size(); ++i) {
      if ((i < r.begin || i >= r.end) && e.before[i] != e.after[i]) ++violations;
    }
  };
  const auto start = normals(256, 0x72);
  OptimConfig c;
  c.mu = 1e-4;
  c.steps = 500;
  for (auto order : {BlockOrder::kAscending, BlockOrder::kDescending, BlockOrder::kFlipFlop,
                     BlockOrder::kCyclicRandom, BlockOrder::kAdaptive}) {
    c.order = order;
    c.adaptive.warmup = 80;
    mezo_bcd_run(q, start, c, part, probe);
    if (order != BlockOrder::kAdaptive) {
      c.adam.interval = 9;
      mezo_bcd_adam_run(q, start, c, part, probe);
    }
  }
  if (violations != 0 || steps != 9 * 500) {
    failures.push_back("isolation: " + std::to_string(violations) + " changed inactive entries");
  }

  // Flip-flop and cyclic-random orders.
  const std::vector<std::size_t> expected{1, 2, 3, 4, 3, 2, 1, 2, 3, 4, 3, 2, 1, 2};
  for (std::size_t t = 1; t <= expected.size(); ++t) {
    if (update_block_idx(BlockOrder::kFlipFlop, t, 4) != expected[t - 1]) {
      failures.push_back("flip-flop at t=" + std::to_string(t));
      break;
    }
  }
  for (std::size_t n : {3, 5, 16}) {
    for (std::size_t w = 0; w < 50; ++w) {
      std::set<std::size_t> seen;
      for (std::size_t t = w * n + 1; t <= (w + 1) * n; ++t) {
        seen.insert(update_block_idx(BlockOrder::kCyclicRandom, t, n, 0x73));
      }
      if (seen.size() != n || *seen.begin() != 1 || *seen.rbegin() != n) {
        failures.push_back("cyclic-random window " + std::to_string(w) + " for N=" +
                           std::to_string(n));
      }
    }
  }

  // Adam resets and the bias-correction identity.
  OptimConfig a;
  a.mu = 1e-4;
  a.steps = 600;
  a.adam.interval = 50;
  std::size_t switches = 0, reset_errors = 0, mhat_errors = 0;
  std::vector<std::pair<std::size_t, std::vector<double>>> first_steps;
  const auto run = mezo_bcd_adam_run(q, start, a, part, [&](const StepEvent& e) {
    const bool boundary = (e.step - 1) % a.adam.interval == 0;
    if (e.block_switched != boundary) ++reset_errors;
    if (e.adam->local_step != (e.step - 1) % a.adam.interval + 1) ++reset_errors;
    if (boundary) {
      ++switches;
      first_steps.emplace_back(e.step, e.adam->m);
    }
  });
  for (const auto& [step, m] : first_steps) {
    const auto& rec = run.log.records[step - 1];
    const auto u = direction_stream(rec.step_seed, m.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double g_hat = rec.projected_grad * u[i];
      const double m_hat = m[i] / (1.0 - a.adam.beta1);
      const double ulp = std::abs(std::nextafter(g_hat, 0.0) - g_hat);
      if (std::abs(m_hat - g_hat) > kMhatUlps * ulp) ++mhat_errors;
    }
  }
  if (reset_errors != 0 || switches != 12) {
    failures.push_back("adam resets: " + std::to_string(reset_errors) + " errors, " +
                       std::to_string(switches) + " switches");
  }
  if (mhat_errors != 0) failures.push_back("m_hat != g_hat in " + std::to_string(mhat_errors) + " entries");

  std::string detail = failures.empty() ? "all checks hold" : "failed:";
  for (const auto& f : failures) detail += " " + f + ";";
  detail += " (roundtrip max " + fmt(worst, 2) + ", " + std::to_string(steps) +
            " isolation steps, " + std::to_string(switches) + " Adam switches, m_hat within " +
            fmt(kMhatUlps, 1) + " ulp)";
  return {failures.empty(), detail};
}

Outcome cost_models(Context&) {
  const std::vector<LayerShape> toy{{4, 4}, {2, 2}};
  const std::uint64_t m = peak_memory_params(MemoryMethod::kMezo, toy).peak;
  const std::uint64_t s = peak_memory_params(MemoryMethod::kSparseMezo, toy).peak;
  const std::uint64_t l = peak_memory_params(MemoryMethod::kLozo, toy, 1).peak;
  bool equal = true;
  Rng rng(0x80);
  for (int k = 0; k < 50; ++k) {
    std::vector<LayerShape> layers(1 + rng.below(20));
    std::vector<std::size_t> blocks(layers.size());
    const std::size_t n = 1 + rng.below(layers.size());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      layers[i] = {1 + rng.below(4096), 1 + rng.below(4096)};
      blocks[i] = rng.below(n);
    }
    equal = equal && peak_memory_params(MemoryMethod::kMezoBcd, layers, 1, blocks).peak ==
                         peak_memory_params(MemoryMethod::kMezo, layers).peak;
  }
  const double t_bcd = traffic_per_step(TrafficMethod::kMezoBcd, 100, 4);
  const double t_mezo = traffic_per_step(TrafficMethod::kMezo, 100, 4);
  const bool ok = m == 36 && s == 52 && l == 30 && equal && t_bcd == 275.0 && t_mezo == 500.0;
  return {ok, "peaks " + std::to_string(m) + "/" + std::to_string(s) + "/" + std::to_string(l) +
                  ", bcd == mezo on 50 random layer sets: " + (equal ? "yes" : "no") +
                  ", traffic d=100 N=4: " + fmt(t_bcd) + " vs " + fmt(t_mezo)};
}

Outcome logistic(Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  harness::LogisticStudyConfig cfg;
  cfg.threads = ctx.threads;
  const auto rows = harness::logistic_study(cfg);
  const double secs = seconds_since(t0);
  bool any = false;
  std::string detail;
  for (double lr : cfg.lrs) {
    bool all = true;
    double worst = 1.0;
    for (const auto& r : rows) {
      if (r.lr != lr) continue;
      worst = std::min(worst, r.best_accuracy);
      if (!(r.best_accuracy >= kAccuracy)) all = false;
    }
    any = any || all;
    detail += "lr " + fmt(lr) + ": lowest best accuracy over seeds " + fmt(worst) + "; ";
  }
  return {any && secs < kBudget9, detail + fmt(secs, 3) + " s"};
}

Outcome determinism(Context& ctx) {
  const auto& first = fig1_right(ctx);
  const std::size_t workers = std::max<std::size_t>(4, ctx.threads);
  harness::ReproduceOptions o;
  o.out_dir = ctx.out / ("threads" + std::to_string(workers));
  o.threads = workers;
  const auto second = harness::reproduce("fig1-right", o);
  std::size_t compared = 0;
  std::vector<std::string> differ;
  for (const auto& f : first.files) {
    if (f.size() < 4 || f.substr(f.size() - 4) != ".csv") continue;
    ++compared;
    if (io::read_file(ctx.out / "threads1" / "fig1-right" / f) !=
        io::read_file(o.out_dir / "fig1-right" / f)) {
      differ.push_back(f);
    }
  }
  std::string detail = std::to_string(compared) + " CSV files compared at 1 and " +
                       std::to_string(workers) + " workers";
  for (const auto& f : differ) detail += "; differs: " + f;
  return {differ.empty() && compared == second.files.size() - 1, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::string out = (fs::temp_directory_path() / "subzero_acceptance").string();
  std::size_t threads = default_threads();
  std::vector<int> only;
  app.add_option("--out", out, "Scratch directory for panel bundles");
  app.add_option("--threads", threads, "Worker pool size")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "Run a subset of criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  ctx.out = out;
  ctx.threads = threads;
  fs::remove_all(ctx.out);

  const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
      {"rho expectation universality", universality},
      {"block-sparse tail enumeration", block_tail},
      {"fig1-left convergence ordering", fig1_left},
      {"fig1-middle iterations x rho-bar", fig1_middle},
      {"fig1-right concentration", concentration},
      {"estimator correctness", estimator},
      {"algorithm fidelity", fidelity},
      {"cost models", cost_models},
      {"logistic substitute", logistic},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.passed) ++failed;
    std::cout << "criterion " << id << " [" << criteria[i].first << "]: "
              << (o.passed ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 4;
}
