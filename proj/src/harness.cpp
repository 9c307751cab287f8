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

#include "subzero/harness.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "subzero/csv.hpp"
#include "subzero/errors.hpp"
#include "subzero/parallel.hpp"
#include "subzero/rng.hpp"

namespace subzero::harness {

namespace {

constexpr std::uint64_t kHessianSalt = 0x4e55;
constexpr std::uint64_t kRunSalt = 0x5eed;
constexpr std::uint64_t kInitSalt = 0x7e7a;
constexpr std::uint64_t kRhoBarSalt = 0x7b;
constexpr std::uint64_t kAlignSalt = 0xa119;

// Shortest round-trip form, used in file names and sidecars.
std::string short_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += short_real(v[i]);
  }
  return out;
}

std::uint64_t run_seed(std::uint64_t master, std::size_t k) {
  return mix64(master, k, kRunSalt);
}

void emit(const fs::path& dir, const std::string& name, const std::string& contents,
          std::vector<std::string>& files) {
  io::write_file(dir / name, contents);
  files.push_back(name);
}

void finish_panel(PanelResult& r, const fs::path& dir, io::KeyValues meta,
                  double seconds, bool include_timing) {
  meta.insert(meta.begin(), {"panel", r.panel});
  for (const auto& c : r.checks) {
    meta.emplace_back("check." + c.name, std::string(c.passed ? "pass" : "fail") + ": " +
                                             c.detail);
  }
  meta.emplace_back("verdict", r.passed() ? "pass" : "fail");
  if (include_timing) meta.emplace_back("wall_time_seconds", short_real(seconds));
  std::ostringstream out;
  io::write_key_values(out, meta);
  emit(dir, r.panel + ".meta", out.str(), r.files);
  io::write_manifest(dir, r.files);
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

bool PanelResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

// ---- Hessian files --------------------------------------------------------

Hessian gen_hessian(const GenHessianRequest& req) {
  Hessian h = req.hetero_refs.empty()
                  ? generate_hessian(req.spec)
                  : heterogeneous_block_hessian(req.spec.dim, req.spec.num_blocks,
                                                req.spec.rank, req.hetero_refs,
                                                req.spec.seed);
  const QuadraticObjective q(h);
  io::save_hessian(req.out, h);

  const auto& ev = q.spectrum().eigenvalues;
  const std::size_t nr = q.numerical_rank();
  io::KeyValues meta{
      {"format", "SZHESS01"},
      {"generator", req.hetero_refs.empty() ? "linear" : "heterogeneous"},
      {"dim", std::to_string(h.dim())},
      {"blocks", std::to_string(h.num_blocks)},
      {"rank", std::to_string(h.rank)},
      {"seed", std::to_string(req.spec.seed)},
  };
  if (req.hetero_refs.empty()) {
    meta.emplace_back("max_eigenvalues", join(req.spec.max_eigenvalues));
  } else {
    meta.emplace_back("refs", join(req.hetero_refs));
  }
  meta.emplace_back("lambda_max", short_real(q.lambda_max()));
  meta.emplace_back("lambda_min_nonzero", short_real(nr > 0 ? ev[static_cast<Eigen::Index>(nr - 1)] : 0.0));
  meta.emplace_back("numerical_rank", std::to_string(nr));
  meta.emplace_back("trace", short_real(q.trace()));
  meta.emplace_back("intdim", short_real(q.trace() / q.lambda_max()));
  std::ostringstream out;
  io::write_key_values(out, meta);
  fs::path meta_path = req.out;
  meta_path += ".meta";
  io::write_file(meta_path, out.str());
  return h;
}

// ---- Alignment sweeps -----------------------------------------------------

AlignmentResult measure_alignment(const QuadraticObjective& h, const AlignmentRequest& req) {
  if (req.ensembles.empty() || req.sranks.empty()) {
    throw InputError("measure_alignment: ensembles and sranks must be non-empty");
  }
  if (req.trials < 2) throw InputError("measure_alignment: need at least 2 trials");
  struct Task {
    Ensemble kind;
    double s;
  };
  std::vector<Task> tasks;
  for (Ensemble e : req.ensembles) {
    for (double s : req.sranks) tasks.push_back({e, s});
  }
  // Validate every group before spending time on any of them.
  const std::size_t d = h.dim();
  for (const auto& t : tasks) {
    if (!(t.s >= 1.0) || t.s > static_cast<double>(d)) {
      throw InputError("measure_alignment: srank " + short_real(t.s) + " outside [1, " +
                       std::to_string(d) + "]");
    }
    if (t.kind == Ensemble::kBlockSparse) {
      const auto si = static_cast<std::size_t>(t.s);
      if (static_cast<double>(si) != t.s || d % si != 0) {
        throw InputError("block-sparse needs s to divide d (d=" + std::to_string(d) +
                         ", s=" + short_real(t.s) + ")");
      }
    }
  }
  std::vector<std::vector<AlignmentSample>> per(tasks.size());
  parallel_for(tasks.size(), req.threads, [&](std::size_t i) {
    const auto& t = tasks[i];
    const std::uint64_t seed = mix64(req.seed, static_cast<std::uint64_t>(t.kind),
                                     std::bit_cast<std::uint64_t>(t.s));
    per[i] = rho_distribution(t.kind, h, t.s, req.trials, seed, req.sparse_mode, 1);
  });
  AlignmentResult out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    std::vector<double> rhos;
    rhos.reserve(per[i].size());
    for (const auto& s : per[i]) rhos.push_back(s.rho);
    out.groups.push_back({tasks[i].kind, tasks[i].s, summarize(rhos),
                          expected_rho(h, tasks[i].s)});
    out.samples.insert(out.samples.end(), per[i].begin(), per[i].end());
  }
  return out;
}

void write_alignment_summary_csv(std::ostream& out, const std::vector<AlignmentGroup>& g) {
  out << "ensemble,srank,count,mean,variance,std_error,min,max,expected\n";
  for (const auto& x : g) {
    out << csv::row({std::string(ensemble_name(x.kind)), csv::real(x.srank),
                     std::to_string(x.summary.count), csv::real(x.summary.mean),
                     csv::real(x.summary.variance), csv::real(x.summary.std_error),
                     csv::real(x.summary.min), csv::real(x.summary.max),
                     csv::real(x.expected)})
        << '\n';
  }
}

// ---- Optimizer sweeps -----------------------------------------------------

std::vector<double> initial_theta(std::size_t d, std::uint64_t seed, bool gaussian) {
  std::vector<double> theta(d, 0.0);
  if (gaussian) {
    Rng rng(mix64(seed, kInitSalt));
    rng.fill_normal(theta);
  }
  return theta;
}

OptimizeOutcome run_optimize(const OptimizeRequest& req) {
  req.optim.validate();
  if (req.seeds.empty()) throw InputError("optimize: no seeds given");
  {
    auto sorted = req.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InputError("optimize: seeds must be distinct");
    }
  }

  std::unique_ptr<Objective> obj;
  const QuadraticObjective* quad = nullptr;
  if (req.objective == "logistic") {
    obj = std::make_unique<LogisticObjective>(
        LogisticObjective::synthetic(req.logistic, req.batch_size));
  } else if (req.objective == "quadratic") {
    Hessian h = req.hessian_file ? io::load_hessian(*req.hessian_file)
                : req.hetero_refs.empty()
                    ? generate_hessian(req.hessian)
                    : heterogeneous_block_hessian(req.hessian.dim, req.hessian.num_blocks,
                                                  req.hessian.rank, req.hetero_refs,
                                                  req.hessian.seed);
    auto q = std::make_unique<QuadraticObjective>(std::move(h));
    quad = q.get();
    obj = std::move(q);
  } else {
    throw InputError("optimize: unknown objective '" + req.objective + "'");
  }
  const std::size_t d = obj->dim();

  const bool bcd = req.method.rfind("mezo-bcd", 0) == 0;
  if (!bcd && req.method != "zo-sgd") {
    throw InputError("optimize: unknown method '" + req.method + "'");
  }
  if (!req.gammas.empty() && (bcd || quad == nullptr)) {
    throw InputError("optimize: --gamma needs zo-sgd on a quadratic objective");
  }
  if (req.optim.measure_rho && quad == nullptr) {
    throw InputError("optimize: alignment can only be measured on a quadratic objective");
  }
  std::optional<BlockPartition> partition;
  if (bcd) partition = BlockPartition::equal(d, req.num_blocks);

  auto make_sampler = [&](double gamma) {
    if (!std::isnan(gamma)) {
      return SubspaceSampler::controlled(*quad, static_cast<std::size_t>(req.srank), gamma);
    }
    if (req.ensemble == "identity") return SubspaceSampler::identity();
    if (req.ensemble == "low-rank") {
      return SubspaceSampler::low_rank(d, static_cast<std::size_t>(req.srank));
    }
    if (req.ensemble == "sparse") return SubspaceSampler::sparse(d, req.srank, req.sparse_mode);
    if (req.ensemble == "block-sparse") {
      const auto s = static_cast<std::size_t>(req.srank);
      if (s < 1 || d % s != 0) {
        throw InputError("block-sparse needs s to divide d (d=" + std::to_string(d) +
                         ", s=" + short_real(req.srank) + ")");
      }
      return SubspaceSampler::block_sparse(BlockPartition::equal(d, d / s));
    }
    throw InputError("optimize: unknown ensemble '" + req.ensemble + "'");
  };

  struct Point {
    std::uint64_t seed;
    double gamma;
    std::string tag;
  };
  std::vector<Point> points;
  const std::vector<double> gammas =
      req.gammas.empty() ? std::vector<double>{std::numeric_limits<double>::quiet_NaN()}
                         : req.gammas;
  for (auto s : req.seeds) {
    for (double g : gammas) {
      std::string tag = "run_seed" + std::to_string(s);
      if (!std::isnan(g)) tag += "_gamma" + short_real(g);
      points.push_back({s, g, std::move(tag)});
    }
  }
  // Build samplers up front so invalid settings fail before any run starts.
  std::vector<SubspaceSampler> samplers;
  if (!bcd) {
    for (const auto& p : points) samplers.push_back(make_sampler(p.gamma));
  }
  const bool gaussian =
      req.init == "gaussian" || (req.init == "auto" && req.objective == "quadratic");
  if (req.init != "auto" && req.init != "gaussian" && req.init != "zeros") {
    throw InputError("optimize: unknown init '" + req.init + "'");
  }

  OptimizeOutcome out;
  out.runs.resize(points.size());
  parallel_for(points.size(), req.threads, [&](std::size_t i) {
    OptimConfig c = req.optim;
    c.seed = points[i].seed;
    const auto theta0 = initial_theta(d, c.seed, gaussian);
    if (!bcd) {
      out.runs[i] = zo_sgd_run(*obj, theta0, c, samplers[i]);
    } else if (req.method == "mezo-bcd") {
      out.runs[i] = mezo_bcd_run(*obj, theta0, c, *partition);
    } else if (req.method == "mezo-bcd-adaptive") {
      c.order = BlockOrder::kAdaptive;
      out.runs[i] = adaptive_run(*obj, theta0, c, *partition);
    } else if (req.method == "mezo-bcd-adam") {
      out.runs[i] = mezo_bcd_adam_run(*obj, theta0, c, *partition);
    } else {
      throw InputError("optimize: unknown method '" + req.method + "'");
    }
    out.runs[i].log.metadata.emplace_back("init", gaussian ? "gaussian" : "zeros");
    if (!std::isnan(points[i].gamma)) {
      out.runs[i].log.metadata.emplace_back("gamma", short_real(points[i].gamma));
    }
  });

  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& run = out.runs[i];
    std::ostringstream log_csv;
    if (req.optim.measure_rho) {
      log_csv << "step,loss_plus,loss_minus,projected_grad,active_block,step_seed,rho\n";
      for (const auto& r : run.log.records) {
        log_csv << csv::row({std::to_string(r.step), csv::real(r.loss_plus),
                             csv::real(r.loss_minus), csv::real(r.projected_grad),
                             std::to_string(r.active_block), std::to_string(r.step_seed),
                             csv::real(r.rho)})
                << '\n';
      }
    } else {
      write_runlog_csv(log_csv, run.log);
    }
    emit(req.out_dir, points[i].tag + ".csv", log_csv.str(), out.files);
    std::ostringstream meta;
    write_runlog_metadata(meta, run.log, req.include_timing);
    emit(req.out_dir, points[i].tag + ".meta", meta.str(), out.files);
    if (req.save_theta) {
      std::ostringstream th;
      th << "index,value\n";
      for (std::size_t k = 0; k < run.theta.size(); ++k) {
        th << k << ',' << csv::real(run.theta[k]) << '\n';
      }
      emit(req.out_dir, points[i].tag + "_theta.csv", th.str(), out.files);
    }
    if (run.log.status != RunStatus::kCompleted) {
      out.failures.push_back(points[i].tag + ": " + run.log.message);
    }
  }
  io::write_manifest(req.out_dir, out.files);
  return out;
}

// ---- Figure panels --------------------------------------------------------

Fig1Config Fig1Config::left() { return Fig1Config{}; }

Fig1Config Fig1Config::middle() {
  Fig1Config c;
  c.steps = 10000;
  c.gammas = {0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  return c;
}

Summary controlled_rho_bar(const QuadraticObjective& h, std::size_t s, double gamma,
                           std::size_t draws, std::uint64_t seed) {
  if (draws < 2) throw InputError("controlled_rho_bar: need at least 2 draws");
  std::vector<double> rho(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    rho[i] = alignment_rho(controlled_projection(h, s, gamma, mix64(seed, i)), h);
  }
  return summarize(rho);
}

Fig1Result run_fig1(const Fig1Config& cfg) {
  if (cfg.gammas.empty() || cfg.num_seeds < 1) {
    throw InputError("fig1: need at least one gamma and one seed");
  }
  HessianSpec spec;
  spec.dim = cfg.dim;
  spec.rank = cfg.hessian_rank;
  spec.num_blocks = 1;
  spec.max_eigenvalues = {cfg.max_eigenvalue};
  spec.seed = mix64(cfg.seed, kHessianSalt);
  Fig1Result out{QuadraticObjective(generate_hessian(spec)), {}};
  const QuadraticObjective& h = out.objective;

  const std::size_t ng = cfg.gammas.size();
  const std::size_t ns = cfg.num_seeds;
  out.points.resize(ng);
  std::vector<SubspaceSampler> samplers;
  for (std::size_t g = 0; g < ng; ++g) {
    out.points[g].gamma = cfg.gammas[g];
    out.points[g].curves.resize(ns);
    out.points[g].final_losses.resize(ns);
    samplers.push_back(SubspaceSampler::controlled(h, cfg.srank, cfg.gammas[g]));
  }

  OptimConfig base;
  base.mu = cfg.mu;
  base.lr = cfg.lr;
  base.steps = cfg.steps;
  // Rho-bar tasks first, then one task per (gamma, seed) run.
  const std::size_t n_tasks = ng + ng * ns;
  std::vector<RunStatus> status(ng * ns, RunStatus::kCompleted);
  std::vector<std::string> messages(ng * ns);
  parallel_for(n_tasks, cfg.threads, [&](std::size_t task) {
    if (task < ng) {
      const Summary s = controlled_rho_bar(h, cfg.srank, cfg.gammas[task], cfg.rho_draws,
                                           mix64(cfg.seed, kRhoBarSalt));
      out.points[task].rho_bar = s.mean;
      out.points[task].rho_se = s.std_error;
      return;
    }
    const std::size_t idx = task - ng;
    const std::size_t g = idx / ns;
    const std::size_t k = idx % ns;
    OptimConfig c = base;
    c.seed = run_seed(cfg.seed, k);
    const auto theta0 = initial_theta(h.dim(), c.seed, true);
    RunResult r = zo_sgd_run(h, theta0, c, samplers[g]);
    status[idx] = r.log.status;
    messages[idx] = r.log.message;
    out.points[g].curves[k] = loss_curve(r.log);
    out.points[g].final_losses[k] = h.loss(r.theta);
  });
  for (std::size_t i = 0; i < status.size(); ++i) {
    if (status[i] != RunStatus::kCompleted) {
      throw NumericalError("fig1 run (gamma=" + short_real(cfg.gammas[i / ns]) +
                           ", seed index " + std::to_string(i % ns) + "): " + messages[i]);
    }
  }
  for (auto& p : out.points) p.mean_curve = mean_curve(p.curves);
  return out;
}

ProportionalityReport proportionality(const Fig1Result& r, double min_gamma) {
  const auto base = std::find_if(r.points.begin(), r.points.end(),
                                 [](const Fig1Point& p) { return p.gamma == 0.0; });
  if (base == r.points.end()) throw InputError("proportionality: no gamma = 0 run");
  ProportionalityReport rep;
  rep.target = *std::min_element(base->mean_curve.begin(), base->mean_curve.end());
  std::vector<double> band;
  for (const auto& p : r.points) {
    const auto it = iterations_to_target(p.mean_curve, rep.target);
    rep.iterations.push_back(it);
    const double prod = it ? static_cast<double>(*it) * p.rho_bar
                           : std::numeric_limits<double>::quiet_NaN();
    rep.products.push_back(prod);
    if (p.gamma >= min_gamma - 1e-12) {
      if (!it) rep.all_reached = false;
      band.push_back(prod);
    }
  }
  if (band.empty()) throw InputError("proportionality: no gamma in the band");
  if (rep.all_reached) {
    rep.mean_product = summarize(band).mean;
    for (double p : band) {
      rep.max_deviation = std::max(rep.max_deviation, std::abs(p / rep.mean_product - 1.0));
    }
  } else {
    rep.mean_product = std::numeric_limits<double>::quiet_NaN();
    rep.max_deviation = std::numeric_limits<double>::infinity();
  }
  return rep;
}

namespace {

io::KeyValues fig1_meta(const Fig1Config& c) {
  return {{"dim", std::to_string(c.dim)},
          {"hessian_rank", std::to_string(c.hessian_rank)},
          {"max_eigenvalue", short_real(c.max_eigenvalue)},
          {"srank", std::to_string(c.srank)},
          {"lr", short_real(c.lr)},
          {"mu", short_real(c.mu)},
          {"steps", std::to_string(c.steps)},
          {"gammas", join(c.gammas)},
          {"num_seeds", std::to_string(c.num_seeds)},
          {"rho_draws", std::to_string(c.rho_draws)},
          {"seed", std::to_string(c.seed)},
          {"init", "gaussian"},
          {"loss", "midpoint of the two perturbed losses"}};
}

}  // namespace

PanelResult reproduce_fig1_left(const Fig1Config& cfg, const fs::path& dir,
                                bool include_timing) {
  const auto start = std::chrono::steady_clock::now();
  const Fig1Result r = run_fig1(cfg);
  PanelResult out;
  out.panel = "fig1-left";

  std::ostringstream curves;
  curves << "gamma,seed,step,loss\n";
  for (const auto& p : r.points) {
    for (std::size_t k = 0; k < p.curves.size(); ++k) {
      for (std::size_t t = 0; t < p.curves[k].size(); ++t) {
        curves << csv::row({csv::real(p.gamma), std::to_string(k), std::to_string(t + 1),
                            csv::real(p.curves[k][t])})
               << '\n';
      }
    }
  }
  emit(dir, "fig1_left_curves.csv", curves.str(), out.files);

  std::ostringstream summary;
  summary << "gamma,rho_bar,rho_bar_se,final_loss_mean,final_loss_se\n";
  std::vector<double> finals;
  for (const auto& p : r.points) {
    const Summary s = summarize(p.final_losses);
    finals.push_back(s.mean);
    summary << csv::row({csv::real(p.gamma), csv::real(p.rho_bar), csv::real(p.rho_se),
                         csv::real(s.mean), csv::real(s.std_error)})
            << '\n';
  }
  emit(dir, "fig1_left_summary.csv", summary.str(), out.files);

  bool decreasing = true;
  std::string detail = "mean final loss by gamma:";
  for (std::size_t i = 0; i < finals.size(); ++i) {
    detail += " " + short_real(cfg.gammas[i]) + "->" + short_real(finals[i]);
    if (i > 0 && !(finals[i] < finals[i - 1])) decreasing = false;
  }
  out.checks.push_back({"final-loss-decreasing", decreasing, detail});
  finish_panel(out, dir, fig1_meta(cfg), elapsed(start), include_timing);
  return out;
}

PanelResult reproduce_fig1_middle(const Fig1Config& cfg, const fs::path& dir,
                                  bool include_timing) {
  const auto start = std::chrono::steady_clock::now();
  const Fig1Result r = run_fig1(cfg);
  const ProportionalityReport rep = proportionality(r, 0.2);
  PanelResult out;
  out.panel = "fig1-middle";

  // Mean curves thinned to every 10th step keep the bundle small.
  std::ostringstream curves;
  curves << "gamma,step,loss\n";
  for (const auto& p : r.points) {
    for (std::size_t t = 0; t < p.mean_curve.size(); ++t) {
      if ((t + 1) % 10 != 0 && t != 0 && t + 1 != p.mean_curve.size()) continue;
      curves << csv::row({csv::real(p.gamma), std::to_string(t + 1),
                          csv::real(p.mean_curve[t])})
             << '\n';
    }
  }
  emit(dir, "fig1_middle_curves.csv", curves.str(), out.files);

  std::ostringstream summary;
  summary << "gamma,rho_bar,rho_bar_se,iterations,reached,product\n";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& it = rep.iterations[i];
    summary << csv::row({csv::real(r.points[i].gamma), csv::real(r.points[i].rho_bar),
                         csv::real(r.points[i].rho_se),
                         it ? std::to_string(*it) : std::string("NA"), it ? "1" : "0",
                         csv::real(rep.products[i])})
            << '\n';
  }
  emit(dir, "fig1_middle_summary.csv", summary.str(), out.files);

  std::ostringstream detail;
  detail << "target " << short_real(rep.target) << ", mean product "
         << short_real(rep.mean_product) << ", max deviation "
         << short_real(rep.max_deviation) << " (band " << kProportionalityBand << ")";
  out.checks.push_back({"iterations-times-rho-constant",
                        rep.all_reached && rep.max_deviation <= kProportionalityBand,
                        detail.str()});
  auto meta = fig1_meta(cfg);
  meta.emplace_back("target", short_real(rep.target));
  finish_panel(out, dir, std::move(meta), elapsed(start), include_timing);
  return out;
}

PanelResult reproduce_fig1_right(const Fig1RightConfig& cfg, const fs::path& dir,
                                 bool include_timing) {
  const auto start = std::chrono::steady_clock::now();
  const QuadraticObjective h(heterogeneous_block_hessian(
      cfg.dim, cfg.num_blocks, cfg.block_rank, cfg.refs, mix64(cfg.seed, kHessianSalt)));
  AlignmentRequest req = cfg.alignment;
  req.seed = mix64(cfg.seed, kAlignSalt);
  const AlignmentResult res = measure_alignment(h, req);
  PanelResult out;
  out.panel = "fig1-right";

  std::ostringstream samples;
  write_alignment_csv(samples, res.samples);
  emit(dir, "fig1_right_samples.csv", samples.str(), out.files);
  std::ostringstream summary;
  write_alignment_summary_csv(summary, res.groups);
  emit(dir, "fig1_right_summary.csv", summary.str(), out.files);

  bool means_ok = true;
  double worst = 0.0;
  const AlignmentGroup* lr = nullptr;
  const AlignmentGroup* bs = nullptr;
  for (const auto& g : res.groups) {
    const double z = std::abs(g.summary.mean - g.expected) / g.summary.std_error;
    worst = std::max(worst, z);
    if (!(z <= kMeanMatchSe)) means_ok = false;
    if (g.srank == kVarianceRatioSrank && g.kind == Ensemble::kLowRank) lr = &g;
    if (g.srank == kVarianceRatioSrank && g.kind == Ensemble::kBlockSparse) bs = &g;
  }
  out.checks.push_back({"means-match-expected", means_ok,
                        "largest |mean - expected| / SE = " + short_real(worst)});
  if (lr != nullptr && bs != nullptr) {
    const double ratio = bs->summary.variance / lr->summary.variance;
    out.checks.push_back({"block-sparse-variance-ratio", ratio >= kVarianceRatioThreshold,
                          "var(block-sparse) / var(low-rank) at s=64 = " +
                              short_real(ratio) + " (threshold " +
                              short_real(kVarianceRatioThreshold) + ")"});
  }
  io::KeyValues meta{{"dim", std::to_string(cfg.dim)},
                     {"blocks", std::to_string(cfg.num_blocks)},
                     {"block_rank", std::to_string(cfg.block_rank)},
                     {"refs", join(cfg.refs)},
                     {"sranks", join(req.sranks)},
                     {"trials", std::to_string(req.trials)},
                     {"sparse_mode", std::string(sparse_mode_name(req.sparse_mode))},
                     {"seed", std::to_string(cfg.seed)},
                     {"trace", short_real(h.trace())},
                     {"lambda_max", short_real(h.lambda_max())}};
  finish_panel(out, dir, std::move(meta), elapsed(start), include_timing);
  return out;
}

PanelResult reproduce_memory_table(const fs::path& dir) {
  PanelResult out;
  out.panel = "memory-table";
  constexpr std::uint64_t kLozoRank = 2;
  const ModelLayout model = transformer_layout(768, 12, 3072, 50272, 2050);
  std::vector<MemoryReport> reports;
  for (auto m : {MemoryMethod::kMezo, MemoryMethod::kSparseMezo, MemoryMethod::kLozo,
                 MemoryMethod::kMezoBcd}) {
    reports.push_back(peak_memory_params(m, model.layers, kLozoRank, model.block_assignment));
  }
  std::ostringstream csv_out;
  write_memory_csv(csv_out, reports);
  emit(dir, "memory_table.csv", csv_out.str(), out.files);

  const std::vector<LayerShape> toy{{4, 4}, {2, 2}};
  const auto toy_peak = [&](MemoryMethod m) { return peak_memory_params(m, toy, 1).peak; };
  const bool worked = toy_peak(MemoryMethod::kMezo) == 36 &&
                      toy_peak(MemoryMethod::kSparseMezo) == 52 &&
                      toy_peak(MemoryMethod::kLozo) == 30;
  out.checks.push_back({"worked-examples", worked, "toy layers [(4,4),(2,2)] give 36/52/30"});
  out.checks.push_back({"bcd-peak-equals-mezo", reports[3].peak == reports[0].peak,
                        "mezo " + std::to_string(reports[0].peak) + ", mezo-bcd " +
                            std::to_string(reports[3].peak)});
  finish_panel(out, dir,
               {{"model", "decoder hidden=768 layers=12 ffn=3072 vocab=50272 positions=2050"},
                {"lozo_rank", std::to_string(kLozoRank)},
                {"units", "parameters"}},
               0.0, false);
  return out;
}

PanelResult reproduce_traffic(const fs::path& dir) {
  PanelResult out;
  out.panel = "traffic";
  const ModelLayout model = transformer_layout(768, 12, 3072, 50272, 2050);
  std::uint64_t d_model = 0;
  for (const auto& l : model.layers) d_model += l.size();
  std::vector<TrafficRow> rows;
  for (std::uint64_t d : {std::uint64_t{100}, d_model}) {
    rows.push_back({TrafficMethod::kMezo, d, 1, traffic_per_step(TrafficMethod::kMezo, d, 1)});
    for (std::uint64_t n : {1, 2, 4, 8, 13, 16, 32, 64}) {
      rows.push_back({TrafficMethod::kMezoBcd, d, n,
                      traffic_per_step(TrafficMethod::kMezoBcd, static_cast<double>(d),
                                       static_cast<double>(n))});
    }
  }
  std::ostringstream csv_out;
  write_traffic_csv(csv_out, rows);
  emit(dir, "traffic.csv", csv_out.str(), out.files);

  const double t4 = traffic_per_step(TrafficMethod::kMezoBcd, 100, 4);
  const double t_mezo = traffic_per_step(TrafficMethod::kMezo, 100, 1);
  out.checks.push_back({"worked-example", t4 == 275.0 && t_mezo == 500.0,
                        "d=100 N=4: " + short_real(t4) + " vs " + short_real(t_mezo)});
  bool below = true;
  for (const auto& r : rows) {
    if (r.method == TrafficMethod::kMezoBcd && r.num_blocks >= 2 &&
        !(r.traffic < 5.0 * static_cast<double>(r.d))) {
      below = false;
    }
  }
  out.checks.push_back({"bcd-below-mezo", below, "every N >= 2 row below 5d"});
  finish_panel(out, dir, {{"model_params", std::to_string(d_model)}, {"units", "parameters"}},
               0.0, false);
  return out;
}

const std::vector<std::string>& panel_names() {
  static const std::vector<std::string> names{"fig1-left", "fig1-middle", "fig1-right",
                                              "memory-table", "traffic"};
  return names;
}

PanelResult reproduce(const std::string& panel, const ReproduceOptions& opts) {
  const fs::path dir = opts.out_dir / panel;
  if (panel == "fig1-left" || panel == "fig1-middle") {
    Fig1Config c = panel == "fig1-left" ? Fig1Config::left() : Fig1Config::middle();
    c.seed = opts.seed;
    c.threads = opts.threads;
    return panel == "fig1-left" ? reproduce_fig1_left(c, dir, opts.include_timing)
                                : reproduce_fig1_middle(c, dir, opts.include_timing);
  }
  if (panel == "fig1-right") {
    Fig1RightConfig c;
    c.seed = opts.seed;
    c.alignment.threads = opts.threads;
    return reproduce_fig1_right(c, dir, opts.include_timing);
  }
  if (panel == "memory-table") return reproduce_memory_table(dir);
  if (panel == "traffic") return reproduce_traffic(dir);
  throw InputError("unknown panel '" + panel + "'");
}

std::vector<LogisticStudyRow> logistic_study(const LogisticStudyConfig& cfg) {
  if (cfg.lrs.empty() || cfg.num_seeds < 1) throw InputError("logistic_study: empty sweep");
  if (cfg.checkpoint < 1) throw InputError("logistic_study: checkpoint must be >= 1");
  const LogisticObjective obj = LogisticObjective::synthetic(cfg.data, cfg.batch_size);
  const BlockPartition partition = BlockPartition::equal(obj.dim(), cfg.num_blocks);
  std::vector<LogisticStudyRow> rows(cfg.lrs.size() * cfg.num_seeds);
  parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
    LogisticStudyRow& row = rows[i];
    row.lr = cfg.lrs[i / cfg.num_seeds];
    row.run_seed = run_seed(cfg.seed, i % cfg.num_seeds);
    OptimConfig c;
    c.mu = cfg.mu;
    c.lr = row.lr;
    c.steps = cfg.steps;
    c.seed = row.run_seed;
    c.order = BlockOrder::kCyclicRandom;
    const auto hook = [&](const StepEvent& e) {
      if (e.step % cfg.checkpoint != 0 && e.step != cfg.steps) return;
      const double acc = obj.accuracy(e.after);
      row.best_accuracy = std::max(row.best_accuracy, acc);
      if (acc >= 0.9 && !row.first_step_at_90) row.first_step_at_90 = e.step;
    };
    const RunResult r =
        mezo_bcd_run(obj, initial_theta(obj.dim(), c.seed, false), c, partition, hook);
    row.final_accuracy = obj.accuracy(r.theta);
  });
  return rows;
}

}  // namespace subzero::harness
