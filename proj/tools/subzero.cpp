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

// subzero: command-line front end.
//
//   subzero gen-hessian --dim 256 --rank 64 --blocks 1 --max-eig 10 --seed 7 --out h.bin
//   subzero measure-alignment --hessian h.bin --sranks 16,32 --trials 1000 --out align/
//   subzero optimize --method zo-sgd --gamma 1.0 --steps 1000 --out runs/
//   subzero reproduce fig1-right --seed 0 --out results/
//   subzero verify results/fig1-right
//
// Exit codes: 0 success, 2 input error, 3 numerical error or aborted run,
// 4 acceptance or verification failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "subzero/errors.hpp"
#include "subzero/harness.hpp"
#include "subzero/io.hpp"
#include "subzero/parallel.hpp"

namespace fs = std::filesystem;
using namespace subzero;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

std::vector<double> broadcast(std::vector<double> v, std::size_t n) {
  if (v.size() == 1 && n > 1) v.assign(n, v.front());
  return v;
}

int print_panel(const harness::PanelResult& r, const fs::path& dir) {
  for (const auto& c : r.checks) {
    std::cout << r.panel << ": " << (c.passed ? "PASS " : "FAIL ") << c.name << " ("
              << c.detail << ")\n";
  }
  std::cout << r.panel << ": wrote " << r.files.size() << " files to " << dir.string()
            << '\n';
  if (!r.passed()) {
    for (const auto& c : r.checks) {
      if (!c.passed) std::cerr << "acceptance failure: " << r.panel << " " << c.name << '\n';
    }
    return kExitAcceptance;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order optimization toolkit and experiment harness"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "INI file with defaults; flags override it");
  std::size_t threads = default_threads();
  app.add_option("--threads", threads, "Worker pool size (default: SUBZERO_THREADS)")
      ->check(CLI::PositiveNumber);

  // gen-hessian
  auto* gen = app.add_subcommand("gen-hessian", "Generate a block-diagonal PSD Hessian");
  harness::GenHessianRequest gen_req;
  std::vector<double> gen_max{10.0};
  std::string gen_out;
  gen->add_option("--dim", gen_req.spec.dim, "Dimension d")->capture_default_str();
  gen->add_option("--rank", gen_req.spec.rank, "Nonzero eigenvalues per block")
      ->capture_default_str();
  gen->add_option("--blocks", gen_req.spec.num_blocks, "Diagonal blocks")
      ->capture_default_str();
  gen->add_option("--max-eig", gen_max, "Largest eigenvalue per block (one value broadcasts)")
      ->delimiter(',');
  gen->add_option("--hetero", gen_req.hetero_refs,
                  "Reference eigenvalues; selects the heterogeneous generator")
      ->delimiter(',');
  gen->add_option("--seed", gen_req.spec.seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file (a .meta sidecar is written next to it)")
      ->required();

  // measure-alignment
  auto* align = app.add_subcommand("measure-alignment", "Sample rho for random projections");
  harness::AlignmentRequest align_req;
  std::string align_hessian;
  std::string align_out = "alignment";
  std::vector<std::string> align_ens{"low-rank", "sparse", "block-sparse"};
  std::string align_mode = "fixed";
  align->add_option("--hessian", align_hessian, "Hessian file")->required();
  align->add_option("--ensembles", align_ens, "low-rank, sparse, block-sparse")
      ->delimiter(',');
  align->add_option("--sranks", align_req.sranks, "Target stable ranks")->delimiter(',');
  align->add_option("--trials", align_req.trials, "Draws per group")->capture_default_str();
  align->add_option("--sparse-mode", align_mode, "fixed or bernoulli")->capture_default_str();
  align->add_option("--seed", align_req.seed, "Seed")->capture_default_str();
  align->add_option("--out", align_out, "Output directory")->capture_default_str();

  // optimize
  auto* opt = app.add_subcommand("optimize", "Run zeroth-order optimizers over a seed sweep");
  harness::OptimizeRequest oreq;
  std::optional<std::size_t> o_dim;
  std::string o_hessian;
  std::string o_order = "cyclic-random";
  std::string o_schedule = "constant";
  std::string o_mode = "fixed";
  std::vector<double> o_max{10.0};
  std::string o_out = "runs";
  opt->add_option("--objective", oreq.objective, "quadratic or logistic")
      ->capture_default_str();
  opt->add_option("--hessian", o_hessian, "Load the quadratic's Hessian from a file");
  opt->add_option("--dim", o_dim, "Dimension (quadratic 256, logistic 200)");
  opt->add_option("--rank", oreq.hessian.rank, "Hessian rank per block")->capture_default_str();
  opt->add_option("--blocks", oreq.hessian.num_blocks, "Hessian diagonal blocks")
      ->capture_default_str();
  opt->add_option("--max-eig", o_max, "Largest eigenvalue per Hessian block")->delimiter(',');
  opt->add_option("--hetero", oreq.hetero_refs, "Heterogeneous reference eigenvalues")
      ->delimiter(',');
  opt->add_option("--hessian-seed", oreq.hessian.seed, "Seed of the generated Hessian")
      ->capture_default_str();
  opt->add_option("--samples", oreq.logistic.num_samples, "Logistic dataset size")
      ->capture_default_str();
  opt->add_option("--data-seed", oreq.logistic.seed, "Logistic dataset seed")
      ->capture_default_str();
  opt->add_option("--batch", oreq.batch_size, "Logistic minibatch size")->capture_default_str();
  opt->add_option("--method", oreq.method, "zo-sgd, mezo-bcd, mezo-bcd-adam, mezo-bcd-adaptive")
      ->capture_default_str();
  opt->add_option("--ensemble", oreq.ensemble,
                  "zo-sgd subspace: identity, low-rank, sparse, block-sparse")
      ->capture_default_str();
  opt->add_option("--srank", oreq.srank, "Stable rank s of M")->capture_default_str();
  opt->add_option("--sparse-mode", o_mode, "fixed or bernoulli")->capture_default_str();
  opt->add_option("--gamma", oreq.gammas, "Controlled-alignment sweep (zo-sgd, quadratic)")
      ->delimiter(',');
  opt->add_option("--bcd-blocks", oreq.num_blocks, "MeZO-BCD partition size N")
      ->capture_default_str();
  opt->add_option("--order", o_order, "ascending, descending, flipflop, cyclic-random")
      ->capture_default_str();
  opt->add_option("--schedule", o_schedule, "constant or inverse-time")->capture_default_str();
  opt->add_option("--steps", oreq.optim.steps, "Step budget T")->capture_default_str();
  opt->add_option("--lr", oreq.optim.lr, "Learning rate")->capture_default_str();
  opt->add_option("--mu", oreq.optim.mu, "Smoothing scale")->capture_default_str();
  opt->add_option("--seeds", oreq.seeds, "Run seeds")->delimiter(',');
  opt->add_option("--init", oreq.init, "auto, gaussian or zeros")->capture_default_str();
  opt->add_option("--alpha", oreq.optim.adaptive.alpha, "Adaptive EMA decay")
      ->capture_default_str();
  opt->add_option("--tau", oreq.optim.adaptive.tau, "Adaptive softmax temperature")
      ->capture_default_str();
  opt->add_option("--warmup", oreq.optim.adaptive.warmup, "Adaptive warmup (0 = 10N)")
      ->capture_default_str();
  opt->add_flag("--ascending-warmup", oreq.optim.adaptive.ascending_warmup,
                "Warm up in ascending order instead of cyclic-random");
  opt->add_flag("--signed-ema", oreq.optim.adaptive.signed_ema,
                "Track the signed projected gradient in the EMA");
  opt->add_option("--beta1", oreq.optim.adam.beta1, "Adam beta1")->capture_default_str();
  opt->add_option("--beta2", oreq.optim.adam.beta2, "Adam beta2")->capture_default_str();
  opt->add_option("--eps", oreq.optim.adam.eps, "Adam epsilon")->capture_default_str();
  opt->add_option("--interval", oreq.optim.adam.interval, "Adam steps per block")
      ->capture_default_str();
  opt->add_flag("--subspace-coords", oreq.optim.subspace_coords,
                "Low-rank: draw directions in the s-dimensional subspace");
  opt->add_flag("--measure-rho", oreq.optim.measure_rho, "Log rho of every drawn M");
  opt->add_option("--divergence-factor", oreq.optim.divergence_factor,
                  "Abort when the loss exceeds this multiple of the first loss")
      ->capture_default_str();
  opt->add_flag("--save-theta", oreq.save_theta, "Write final parameters per run");
  opt->add_flag("--timing", oreq.include_timing, "Record wall time in the sidecars");
  opt->add_option("--out", o_out, "Output directory")->capture_default_str();

  // reproduce
  auto* rep = app.add_subcommand("reproduce", "Regenerate a figure panel bundle");
  std::string panel;
  harness::ReproduceOptions rep_opts;
  std::string rep_out = "results";
  rep->add_option("panel", panel, "fig1-left, fig1-middle, fig1-right, memory-table, traffic or all")
      ->required();
  rep->add_option("--seed", rep_opts.seed, "Master seed")->capture_default_str();
  rep->add_option("--out", rep_out, "Output directory")->capture_default_str();
  rep->add_flag("--timing", rep_opts.include_timing, "Record wall time in the sidecar");

  // verify
  auto* ver = app.add_subcommand("verify", "Check a directory against its manifest");
  std::string ver_dir;
  ver->add_option("dir", ver_dir, "Directory holding manifest.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*gen) {
      gen_req.spec.max_eigenvalues = broadcast(gen_max, gen_req.spec.num_blocks);
      gen_req.out = gen_out;
      const Hessian h = harness::gen_hessian(gen_req);
      std::cout << "wrote " << gen_out << " (dim " << h.dim() << ", " << h.num_blocks
                << " blocks)\n";
      std::cout << io::read_file(gen_out + ".meta");
    } else if (*align) {
      align_req.ensembles.clear();
      for (const auto& e : align_ens) align_req.ensembles.push_back(parse_ensemble(e));
      align_req.sparse_mode = parse_sparse_mode(align_mode);
      align_req.threads = threads;
      const QuadraticObjective h(io::load_hessian(align_hessian));
      const auto res = harness::measure_alignment(h, align_req);
      std::ostringstream samples;
      write_alignment_csv(samples, res.samples);
      std::ostringstream summary;
      harness::write_alignment_summary_csv(summary, res.groups);
      const fs::path dir = align_out;
      io::write_file(dir / "alignment_samples.csv", samples.str());
      io::write_file(dir / "alignment_summary.csv", summary.str());
      io::write_manifest(dir, {"alignment_samples.csv", "alignment_summary.csv"});
      std::cout << summary.str();
    } else if (*opt) {
      if (!o_hessian.empty()) oreq.hessian_file = fs::path(o_hessian);
      if (o_dim) {
        oreq.hessian.dim = *o_dim;
        oreq.logistic.dim = *o_dim;
      }
      oreq.hessian.max_eigenvalues = broadcast(o_max, oreq.hessian.num_blocks);
      oreq.optim.order = parse_block_order(o_order);
      if (o_schedule == "constant") {
        oreq.optim.schedule = LrSchedule::kConstant;
      } else if (o_schedule == "inverse-time") {
        oreq.optim.schedule = LrSchedule::kInverseTime;
      } else {
        throw InputError("unknown schedule '" + o_schedule + "'");
      }
      oreq.sparse_mode = parse_sparse_mode(o_mode);
      oreq.threads = threads;
      oreq.out_dir = o_out;
      const auto out = harness::run_optimize(oreq);
      std::cout << "wrote " << out.files.size() << " files to " << o_out << '\n';
      if (!out.failures.empty()) {
        for (const auto& f : out.failures) std::cerr << "run aborted: " << f << '\n';
        return kExitNumerical;
      }
    } else if (*rep) {
      rep_opts.out_dir = rep_out;
      rep_opts.threads = threads;
      std::vector<std::string> panels{panel};
      if (panel == "all") panels = harness::panel_names();
      int code = 0;
      for (const auto& p : panels) {
        const auto r = harness::reproduce(p, rep_opts);
        const int c = print_panel(r, rep_opts.out_dir / p);
        if (c != 0) code = c;
      }
      return code;
    } else if (*ver) {
      const auto bad = io::verify_manifest(ver_dir);
      if (!bad.empty()) {
        for (const auto& b : bad) std::cerr << "hash mismatch: " << b << '\n';
        return kExitAcceptance;
      }
      std::cout << "all files match " << (fs::path(ver_dir) / io::kManifestName).string()
                << '\n';
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const AcceptanceError& e) {
    std::cerr << "acceptance failure: " << e.what() << '\n';
    return kExitAcceptance;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
