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

// Experiment orchestration behind the command-line tool: Hessian files,
// alignment sweeps, optimizer sweeps and the reproducible figure panels.
// Every entry point is deterministic given its inputs; worker count only
// changes wall time.

#ifndef SUBZERO_HARNESS_HPP_
#define SUBZERO_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "subzero/analysis.hpp"
#include "subzero/hessian.hpp"
#include "subzero/io.hpp"
#include "subzero/perturbation.hpp"
#include "subzero/zo_optim.hpp"

namespace subzero::harness {

namespace fs = std::filesystem;

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct PanelResult {
  std::string panel;
  std::vector<std::string> files;  // relative to the panel directory
  std::vector<Check> checks;
  bool passed() const;
};

// ---- Hessian files --------------------------------------------------------

struct GenHessianRequest {
  HessianSpec spec;
  std::vector<double> hetero_refs;  // non-empty selects the heterogeneous generator
  fs::path out;
};

// Writes the Hessian file plus "<out>.meta" (spec echo and spectrum summary).
Hessian gen_hessian(const GenHessianRequest& req);

// ---- Alignment sweeps -----------------------------------------------------

struct AlignmentRequest {
  std::vector<Ensemble> ensembles{Ensemble::kLowRank, Ensemble::kSparse,
                                  Ensemble::kBlockSparse};
  std::vector<double> sranks{16, 32, 64, 128, 256};
  std::size_t trials = 1000;
  SparseMode sparse_mode = SparseMode::kFixed;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct AlignmentGroup {
  Ensemble kind = Ensemble::kLowRank;
  double srank = 0.0;
  Summary summary;
  double expected = 0.0;  // s Tr(H) / (d lambda_max)
};

struct AlignmentResult {
  std::vector<AlignmentSample> samples;  // grouped by ensemble, then srank
  std::vector<AlignmentGroup> groups;
};

AlignmentResult measure_alignment(const QuadraticObjective& h, const AlignmentRequest& req);

// Columns: ensemble,srank,count,mean,variance,std_error,min,max,expected.
void write_alignment_summary_csv(std::ostream& out, const std::vector<AlignmentGroup>& g);

// ---- Optimizer sweeps -----------------------------------------------------

struct OptimizeRequest {
  // Objective: a Hessian file, a generated quadratic, or synthetic logistic.
  std::string objective = "quadratic";  // quadratic | logistic
  std::optional<fs::path> hessian_file;
  HessianSpec hessian;
  std::vector<double> hetero_refs;
  LogisticDataSpec logistic;
  std::size_t batch_size = 32;

  // zo-sgd | mezo-bcd | mezo-bcd-adam | mezo-bcd-adaptive
  std::string method = "zo-sgd";
  // identity | low-rank | sparse | block-sparse; a gamma list selects the
  // controlled low-rank projection.
  std::string ensemble = "identity";
  double srank = 64;
  SparseMode sparse_mode = SparseMode::kFixed;
  std::vector<double> gammas;
  std::size_t num_blocks = 1;

  OptimConfig optim;
  std::vector<std::uint64_t> seeds{0};
  std::string init = "auto";  // auto | gaussian | zeros
  bool save_theta = false;
  bool include_timing = false;
  std::size_t threads = 1;
  fs::path out_dir = "runs";
};

struct OptimizeOutcome {
  std::vector<std::string> files;  // relative to out_dir, manifest order
  std::vector<RunResult> runs;     // seed-major, then gamma
  std::vector<std::string> failures;  // messages of runs that aborted
};

OptimizeOutcome run_optimize(const OptimizeRequest& req);

// Initial parameters for a run seed: N(0, I) or zeros.
std::vector<double> initial_theta(std::size_t d, std::uint64_t run_seed, bool gaussian);

// ---- Figure panels --------------------------------------------------------

struct Fig1Config {
  std::size_t dim = 256;
  std::size_t hessian_rank = 64;
  double max_eigenvalue = 10.0;
  std::size_t srank = 64;
  double lr = 1e-3;
  double mu = 1e-4;
  std::size_t steps = 1000;
  std::vector<double> gammas{0.0, 0.2, 0.4, 0.7, 1.0};
  std::size_t num_seeds = 5;
  std::size_t rho_draws = 200;  // Monte Carlo draws per gamma for rho-bar
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  static Fig1Config left();
  static Fig1Config middle();
};

struct Fig1Point {
  double gamma = 0.0;
  double rho_bar = 0.0;
  double rho_se = 0.0;
  std::vector<std::vector<double>> curves;  // per seed, loss proxy per step
  std::vector<double> final_losses;         // true L(theta_T) per seed
  std::vector<double> mean_curve;
};

struct Fig1Result {
  QuadraticObjective objective;
  std::vector<Fig1Point> points;
};

Fig1Result run_fig1(const Fig1Config& cfg);

// Monte Carlo estimate of E[rho] for the controlled projection.
Summary controlled_rho_bar(const QuadraticObjective& h, std::size_t s, double gamma,
                           std::size_t draws, std::uint64_t seed);

// Iterations for each gamma to reach the minimum of the gamma = 0 mean
// curve, and the spread of iterations * rho-bar over gamma >= min_gamma.
struct ProportionalityReport {
  double target = 0.0;
  std::vector<std::optional<std::size_t>> iterations;
  std::vector<double> products;  // NaN where not reached
  double mean_product = 0.0;
  double max_deviation = 0.0;  // max |product / mean - 1| over the band
  bool all_reached = true;
};
ProportionalityReport proportionality(const Fig1Result& r, double min_gamma);

struct Fig1RightConfig {
  std::size_t dim = 1024;
  std::size_t num_blocks = 16;
  std::size_t block_rank = 16;
  std::vector<double> refs{10, 40, 70, 100};
  AlignmentRequest alignment;
  std::uint64_t seed = 0;
};

struct ReproduceOptions {
  fs::path out_dir = "results";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool include_timing = false;
};

// Thresholds applied by the panel verdicts.
inline constexpr double kProportionalityBand = 0.25;
inline constexpr double kMeanMatchSe = 3.0;
inline constexpr double kVarianceRatioThreshold = 2.0;
inline constexpr double kVarianceRatioSrank = 64.0;

const std::vector<std::string>& panel_names();
// Runs one panel into out_dir/<panel>/ and writes its manifest.
PanelResult reproduce(const std::string& panel, const ReproduceOptions& opts);

PanelResult reproduce_fig1_left(const Fig1Config& cfg, const fs::path& dir,
                                bool include_timing = false);
PanelResult reproduce_fig1_middle(const Fig1Config& cfg, const fs::path& dir,
                                  bool include_timing = false);
PanelResult reproduce_fig1_right(const Fig1RightConfig& cfg, const fs::path& dir,
                                 bool include_timing = false);
PanelResult reproduce_memory_table(const fs::path& dir);
PanelResult reproduce_traffic(const fs::path& dir);

// Substitute check for large-model results: MeZO-BCD on the synthetic
// logistic objective. Reports the best training accuracy seen at
// checkpoints for each (lr, seed).
struct LogisticStudyConfig {
  LogisticDataSpec data;
  std::vector<double> lrs{1e-2, 1e-3};
  std::size_t num_seeds = 3;
  std::size_t steps = 20000;
  std::size_t num_blocks = 4;
  std::size_t batch_size = 32;
  double mu = 1e-3;
  std::size_t checkpoint = 500;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};
struct LogisticStudyRow {
  double lr = 0.0;
  std::uint64_t run_seed = 0;
  double best_accuracy = 0.0;
  double final_accuracy = 0.0;
  std::optional<std::size_t> first_step_at_90;
};
std::vector<LogisticStudyRow> logistic_study(const LogisticStudyConfig& cfg);

}  // namespace subzero::harness

#endif  // SUBZERO_HARNESS_HPP_
