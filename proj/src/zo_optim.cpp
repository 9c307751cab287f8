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

#include "subzero/zo_optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "subzero/csv.hpp"
#include "subzero/errors.hpp"
#include "subzero/rng.hpp"

namespace subzero {

namespace {

constexpr std::uint64_t kSubspaceSalt = 0x4d;
constexpr std::uint64_t kAdaptiveSalt = 0xada;
constexpr std::uint64_t kCycleSalt = 0xb10c;

std::string real_str(double v) { return csv::real(v); }

struct PairLoss {
  double plus = 0.0;
  double minus = 0.0;
};

// Both helpers restore the perturbed entries from a copy of the slice rather
// than by a third perturbation, so a zero step leaves theta bit-exact.
PairLoss two_point_seeded(const Objective& obj, std::span<double> theta,
                          BlockRange range, double mu, std::uint64_t seed,
                          std::uint64_t batch) {
  const auto slice = theta.subspan(range.begin, range.size());
  const std::vector<double> saved(slice.begin(), slice.end());
  PairLoss out;
  perturb_parameters(slice, mu, seed);
  out.plus = obj.loss(theta, batch);
  perturb_parameters(slice, -2.0 * mu, seed);
  out.minus = obj.loss(theta, batch);
  std::copy(saved.begin(), saved.end(), slice.begin());
  return out;
}

PairLoss two_point_direction(const Objective& obj, std::span<double> theta,
                             std::span<const double> v, double mu,
                             std::uint64_t batch) {
  const std::vector<double> saved(theta.begin(), theta.end());
  PairLoss out;
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += mu * v[i];
  out.plus = obj.loss(theta, batch);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= 2.0 * mu * v[i];
  out.minus = obj.loss(theta, batch);
  std::copy(saved.begin(), saved.end(), theta.begin());
  return out;
}

// theta_i -= scale * u_i with u the stream of `seed` (seed reuse).
void descend_seeded(std::span<double> slice, double scale, std::uint64_t seed) {
  const auto u = direction_stream(seed, slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) slice[i] -= scale * u[i];
}

double projected(const PairLoss& p, double mu) { return (p.plus - p.minus) / (2.0 * mu); }

void check_start(const Objective& obj, std::span<const double> theta0) {
  if (theta0.size() != obj.dim()) {
    std::ostringstream msg;
    msg << "initial parameters have dimension " << theta0.size()
        << ", objective expects " << obj.dim();
    throw InputError(msg.str());
  }
  for (double x : theta0) {
    if (!std::isfinite(x)) throw InputError("initial parameters are not finite");
  }
}

void check_partition(const Objective& obj, const BlockPartition& p) {
  if (p.dim() != obj.dim()) {
    std::ostringstream msg;
    msg << "block partition covers " << p.dim() << " coordinates, objective has "
        << obj.dim();
    throw InputError(msg.str());
  }
}

// Divergence / non-finite guard shared by all runs.
class Guard {
 public:
  Guard(double factor, RunLog& log) : factor_(factor), log_(log) {}

  bool admit(const StepRecord& r) {
    if (!std::isfinite(r.loss_plus) || !std::isfinite(r.loss_minus)) {
      log_.status = RunStatus::kNonFinite;
      log_.message = "non-finite loss at step " + std::to_string(r.step);
      return false;
    }
    const double proxy = 0.5 * (r.loss_plus + r.loss_minus);
    if (r.step == 1) reference_ = proxy;
    if (reference_ > 0.0 && proxy > factor_ * reference_) {
      log_.status = RunStatus::kDiverged;
      std::ostringstream msg;
      msg << "diverged at step " << r.step << ": loss " << proxy
          << " exceeds " << factor_ << "x the initial loss " << reference_;
      log_.message = msg.str();
      return false;
    }
    return true;
  }

 private:
  double factor_;
  RunLog& log_;
  double reference_ = 0.0;
};

void common_metadata(RunLog& log, const std::string& method, const Objective& obj,
                     const OptimConfig& c) {
  log.metadata = {
      {"method", method},
      {"objective", obj.id()},
      {"dim", std::to_string(obj.dim())},
      {"steps", std::to_string(c.steps)},
      {"mu", real_str(c.mu)},
      {"lr", real_str(c.lr)},
      {"schedule", c.schedule == LrSchedule::kConstant ? "constant" : "inverse-time"},
      {"seed", std::to_string(c.seed)},
  };
}

// Runs `steps` iterations of `step`, which evaluates the loss pair for step
// t, fills the record and event, and applies the update only when the guard
// admits the record. Returns false to stop.
template <class StepFn>
RunResult drive(const Objective& obj, std::span<const double> theta0,
                const OptimConfig& config, RunLog log, const StepHook& hook,
                StepFn&& step) {
  const auto start = std::chrono::steady_clock::now();
  RunResult out{std::move(log), std::vector<double>(theta0.begin(), theta0.end())};
  out.log.records.reserve(config.steps);
  Guard guard(config.divergence_factor, out.log);
  std::vector<double> before;
  std::span<double> theta(out.theta);
  for (std::size_t t = 1; t <= config.steps; ++t) {
    if (hook) before.assign(out.theta.begin(), out.theta.end());
    StepRecord rec;
    rec.step = t;
    rec.step_seed = step_seed(config.seed, t);
    StepEvent event;
    const bool ok = step(t, theta, rec, event, guard);
    out.log.records.push_back(rec);
    if (!ok) break;
    if (hook) {
      event.step = t;
      event.active_block = rec.active_block;
      event.before = before;
      event.after = out.theta;
      hook(event);
    }
  }
  out.log.metadata.emplace_back("status", out.log.status == RunStatus::kCompleted
                                              ? "completed"
                                              : (out.log.status == RunStatus::kDiverged
                                                     ? "diverged"
                                                     : "non-finite"));
  if (!out.log.message.empty()) out.log.metadata.emplace_back("message", out.log.message);
  out.log.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  (void)obj;
  return out;
}

// One MeZO-BCD step on `range`: perturb, evaluate, restore, descend.
bool block_step(const Objective& obj, const OptimConfig& c, std::size_t t,
                std::span<double> theta, BlockRange range, StepRecord& rec,
                Guard& guard) {
  const PairLoss p = two_point_seeded(obj, theta, range, c.mu, rec.step_seed,
                                      batch_seed(c.seed, t));
  rec.loss_plus = p.plus;
  rec.loss_minus = p.minus;
  rec.projected_grad = projected(p, c.mu);
  if (!guard.admit(rec)) return false;
  descend_seeded(theta.subspan(range.begin, range.size()),
                 c.lr_at(t) * rec.projected_grad, rec.step_seed);
  return true;
}

std::vector<std::size_t> cycle_permutation(std::size_t n, std::uint64_t seed,
                                           std::size_t window) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{1});
  Rng rng(mix64(seed, window, kCycleSalt));
  rng.shuffle(perm);
  return perm;
}

}  // namespace

std::string_view block_order_name(BlockOrder o) {
  switch (o) {
    case BlockOrder::kAscending: return "ascending";
    case BlockOrder::kDescending: return "descending";
    case BlockOrder::kFlipFlop: return "flipflop";
    case BlockOrder::kCyclicRandom: return "cyclic-random";
    case BlockOrder::kAdaptive: return "adaptive";
  }
  return "?";
}

BlockOrder parse_block_order(std::string_view name) {
  if (name == "ascending") return BlockOrder::kAscending;
  if (name == "descending") return BlockOrder::kDescending;
  if (name == "flipflop" || name == "flip-flop") return BlockOrder::kFlipFlop;
  if (name == "cyclic-random" || name == "random") return BlockOrder::kCyclicRandom;
  if (name == "adaptive") return BlockOrder::kAdaptive;
  throw InputError("unknown block order '" + std::string(name) + "'");
}

void OptimConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InputError("config: mu must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InputError("config: lr must be non-negative");
  if (steps < 1) throw InputError("config: steps must be at least 1");
  if (!(adaptive.alpha > 0.0 && adaptive.alpha <= 1.0)) {
    throw InputError("config: adaptive alpha must lie in (0, 1]");
  }
  if (!(adaptive.tau > 0.0)) throw InputError("config: adaptive tau must be positive");
  if (adam.interval < 1) throw InputError("config: adam interval must be at least 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw InputError("config: adam betas must lie in [0, 1)");
  }
  if (!(adam.eps >= 0.0)) throw InputError("config: adam eps must be non-negative");
  if (!(divergence_factor > 0.0)) throw InputError("config: divergence factor must be positive");
}

double OptimConfig::lr_at(std::size_t t) const {
  return schedule == LrSchedule::kConstant ? lr : lr / static_cast<double>(t);
}

void AdamState::reset(std::size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  local_step = 0;
}

void perturb_parameters(std::span<double> theta, double mu, std::uint64_t seed) {
  const auto u = direction_stream(seed, theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += mu * u[i];
}

std::vector<double> direction_stream(std::uint64_t seed, std::size_t n) {
  std::vector<double> u(n);
  Rng rng(seed);
  rng.fill_normal(u);
  return u;
}

double spsa_gradient(const Objective& obj, std::span<double> theta,
                     const Perturbation& m, double mu, std::uint64_t seed,
                     std::uint64_t batch) {
  if (!(mu > 0.0)) throw InputError("spsa_gradient: mu must be positive");
  if (theta.size() != obj.dim()) throw InputError("spsa_gradient: dimension mismatch");
  PairLoss p;
  if (std::holds_alternative<IdentityPerturbation>(m)) {
    p = two_point_seeded(obj, theta, BlockRange{0, theta.size()}, mu, seed, batch);
  } else {
    const Vector v = apply_M(m, direction_stream(seed, theta.size()));
    p = two_point_direction(obj, theta, std::span<const double>(v.data(), theta.size()),
                            mu, batch);
  }
  if (!std::isfinite(p.plus) || !std::isfinite(p.minus)) {
    throw NumericalError("spsa_gradient: non-finite loss");
  }
  return projected(p, mu);
}

double spsa_gradient_along(const Objective& obj, std::span<double> theta,
                           std::span<const double> direction, double mu,
                           std::uint64_t batch) {
  if (!(mu > 0.0)) throw InputError("spsa_gradient: mu must be positive");
  if (theta.size() != obj.dim() || direction.size() != theta.size()) {
    throw InputError("spsa_gradient: dimension mismatch");
  }
  const PairLoss p = two_point_direction(obj, theta, direction, mu, batch);
  if (!std::isfinite(p.plus) || !std::isfinite(p.minus)) {
    throw NumericalError("spsa_gradient: non-finite loss");
  }
  return projected(p, mu);
}

SubspaceSampler SubspaceSampler::identity() {
  SubspaceSampler s;
  s.name_ = "identity";
  return s;
}

SubspaceSampler SubspaceSampler::low_rank(std::size_t d, std::size_t rank) {
  if (rank < 1 || rank > d) throw InputError("low-rank sampler: rank outside [1, d]");
  SubspaceSampler s;
  s.draw_ = [d, rank](std::uint64_t seed) { return sample_low_rank(d, rank, seed); };
  s.name_ = "low-rank(s=" + std::to_string(rank) + ")";
  return s;
}

SubspaceSampler SubspaceSampler::sparse(std::size_t d, double srank, SparseMode mode) {
  if (!(srank > 0.0) || srank > static_cast<double>(d)) {
    throw InputError("sparse sampler: s outside (0, d]");
  }
  SubspaceSampler s;
  s.draw_ = [d, srank, mode](std::uint64_t seed) {
    return sample_sparse(d, srank, mode, seed);
  };
  s.name_ = "sparse(s=" + real_str(srank) + ",mode=" +
            std::string(sparse_mode_name(mode)) + ")";
  return s;
}

SubspaceSampler SubspaceSampler::block_sparse(BlockPartition partition) {
  SubspaceSampler s;
  s.name_ = "block-sparse(N=" + std::to_string(partition.num_blocks()) + ")";
  s.draw_ = [p = std::move(partition)](std::uint64_t seed) {
    return sample_block_sparse(p, seed);
  };
  return s;
}

SubspaceSampler SubspaceSampler::controlled(const QuadraticObjective& h,
                                            std::size_t rank, double gamma) {
  // Fail at construction rather than on the first step.
  (void)controlled_projection(h, rank, gamma, 0);
  SubspaceSampler s;
  s.draw_ = [&h, rank, gamma](std::uint64_t seed) {
    return controlled_projection(h, rank, gamma, seed);
  };
  s.name_ = "controlled(s=" + std::to_string(rank) + ",gamma=" + real_str(gamma) + ")";
  return s;
}

std::size_t update_block_idx(BlockOrder order, std::size_t t, std::size_t n,
                             std::uint64_t seed) {
  if (n < 1) throw InputError("update_block_idx: need at least one block");
  if (t < 1) throw InputError("update_block_idx: steps are 1-based");
  switch (order) {
    case BlockOrder::kAscending:
      return ((t - 1) % n) + 1;
    case BlockOrder::kDescending:
      return n - ((t - 1) % n);
    case BlockOrder::kFlipFlop: {
      if (n == 1) return 1;
      const auto period = static_cast<long long>(2 * n - 2);
      const auto phase = static_cast<long long>((t - 1) % static_cast<std::size_t>(period));
      return n - static_cast<std::size_t>(std::llabs(phase - static_cast<long long>(n - 1)));
    }
    case BlockOrder::kCyclicRandom: {
      const std::size_t window = (t - 1) / n;
      return cycle_permutation(n, seed, window)[(t - 1) % n];
    }
    case BlockOrder::kAdaptive:
      break;
  }
  throw InputError("update_block_idx: adaptive order has no fixed schedule");
}

std::vector<double> softmax_probabilities(std::span<const double> values, double tau) {
  if (values.empty()) throw InputError("softmax: no values");
  if (!(tau > 0.0)) throw InputError("softmax: tau must be positive");
  const double top = *std::max_element(values.begin(), values.end());
  std::vector<double> p(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    p[i] = std::exp((values[i] - top) / tau);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::size_t sample_categorical(std::span<const double> p, double uniform) {
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (uniform < acc) return k;
  }
  // Rounding left the cumulative sum just below 1: take the last nonzero.
  for (std::size_t k = p.size(); k > 0; --k) {
    if (p[k - 1] > 0.0) return k - 1;
  }
  return p.size() - 1;
}

void adam_direction(AdamState& state, std::span<const double> g,
                    const AdamParams& params, std::span<double> direction) {
  if (g.size() != state.m.size() || direction.size() != g.size()) {
    throw InputError("adam_direction: state size does not match the block");
  }
  ++state.local_step;
  const auto t = static_cast<double>(state.local_step);
  const double c1 = 1.0 - std::pow(params.beta1, t);
  const double c2 = 1.0 - std::pow(params.beta2, t);
  for (std::size_t i = 0; i < g.size(); ++i) {
    state.m[i] = params.beta1 * state.m[i] + (1.0 - params.beta1) * g[i];
    state.v[i] = params.beta2 * state.v[i] + (1.0 - params.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    direction[i] = m_hat / (std::sqrt(v_hat) + params.eps);
  }
}

RunResult zo_sgd_run(const Objective& obj, std::span<const double> theta0,
                     const OptimConfig& config, const SubspaceSampler& sampler,
                     const StepHook& hook) {
  config.validate();
  check_start(obj, theta0);
  const auto* quad = dynamic_cast<const QuadraticObjective*>(&obj);
  if (config.measure_rho && quad == nullptr) {
    throw InputError("zo_sgd_run: alignment can only be measured on a quadratic");
  }
  RunLog log;
  common_metadata(log, sampler.is_identity() ? "zo-sgd" : "subspace-zo-sgd", obj, config);
  log.metadata.emplace_back("sampler", sampler.name());
  log.metadata.emplace_back("direction_space",
                            config.subspace_coords ? "subspace" : "ambient");
  const std::size_t d = obj.dim();
  std::vector<double> v(d);

  return drive(obj, theta0, config, std::move(log), hook,
               [&](std::size_t t, std::span<double> theta, StepRecord& rec,
                   StepEvent&, Guard& guard) {
                 const std::uint64_t batch = batch_seed(config.seed, t);
                 if (sampler.is_identity()) {
                   return block_step(obj, config, t, theta, BlockRange{0, d}, rec, guard) &&
                          (!config.measure_rho || (rec.rho = quad->trace() / quad->lambda_max(), true));
                 }
                 const Perturbation m = sampler.draw(mix64(config.seed, t, kSubspaceSalt));
                 const auto* lr = std::get_if<LowRankPerturbation>(&m);
                 if (lr != nullptr && config.subspace_coords) {
                   const auto z = direction_stream(rec.step_seed,
                                                   static_cast<std::size_t>(lr->basis.cols()));
                   Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(d)) =
                       apply_basis(*lr, z);
                 } else {
                   Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(d)) =
                       apply_M(m, direction_stream(rec.step_seed, d));
                 }
                 const PairLoss p = two_point_direction(obj, theta, v, config.mu, batch);
                 rec.loss_plus = p.plus;
                 rec.loss_minus = p.minus;
                 rec.projected_grad = projected(p, config.mu);
                 if (const auto* b = std::get_if<BlockSparsePerturbation>(&m)) {
                   rec.active_block = static_cast<long>(b->block);
                 }
                 if (config.measure_rho) rec.rho = alignment_rho(m, *quad);
                 if (!guard.admit(rec)) return false;
                 const double scale = config.lr_at(t) * rec.projected_grad;
                 for (std::size_t i = 0; i < d; ++i) theta[i] -= scale * v[i];
                 return true;
               });
}

RunResult mezo_bcd_run(const Objective& obj, std::span<const double> theta0,
                       const OptimConfig& config, const BlockPartition& partition,
                       const StepHook& hook) {
  config.validate();
  check_start(obj, theta0);
  check_partition(obj, partition);
  if (config.order == BlockOrder::kAdaptive) return adaptive_run(obj, theta0, config, partition, hook);
  RunLog log;
  common_metadata(log, "mezo-bcd", obj, config);
  log.metadata.emplace_back("order", std::string(block_order_name(config.order)));
  log.metadata.emplace_back("num_blocks", std::to_string(partition.num_blocks()));
  const std::size_t n = partition.num_blocks();

  return drive(obj, theta0, config, std::move(log), hook,
               [&](std::size_t t, std::span<double> theta, StepRecord& rec,
                   StepEvent&, Guard& guard) {
                 const std::size_t j = update_block_idx(config.order, t, n, config.seed) - 1;
                 rec.active_block = static_cast<long>(j);
                 return block_step(obj, config, t, theta, partition.block(j), rec, guard);
               });
}

RunResult adaptive_run(const Objective& obj, std::span<const double> theta0,
                       const OptimConfig& config, const BlockPartition& partition,
                       const StepHook& hook) {
  config.validate();
  check_start(obj, theta0);
  check_partition(obj, partition);
  const std::size_t n = partition.num_blocks();
  const AdaptiveParams& ap = config.adaptive;
  const std::size_t warmup = ap.warmup == 0 ? 10 * n : ap.warmup;
  if (warmup > config.steps) {
    std::ostringstream msg;
    msg << "adaptive_run: warmup " << warmup << " exceeds the step budget "
        << config.steps;
    throw InputError(msg.str());
  }
  RunLog log;
  common_metadata(log, "mezo-bcd-adaptive", obj, config);
  log.metadata.emplace_back("num_blocks", std::to_string(n));
  log.metadata.emplace_back("alpha", real_str(ap.alpha));
  log.metadata.emplace_back("tau", real_str(ap.tau));
  log.metadata.emplace_back("warmup", std::to_string(warmup));
  log.metadata.emplace_back("warmup_order", ap.ascending_warmup ? "ascending" : "cyclic-random");
  log.metadata.emplace_back("ema", ap.signed_ema ? "signed" : "abs");

  std::vector<double> ema(n, 0.0);
  std::vector<double> probs;
  const BlockOrder warm_order =
      ap.ascending_warmup ? BlockOrder::kAscending : BlockOrder::kCyclicRandom;

  return drive(obj, theta0, config, std::move(log), hook,
               [&](std::size_t t, std::span<double> theta, StepRecord& rec,
                   StepEvent& event, Guard& guard) {
                 std::size_t j = 0;
                 if (t <= warmup) {
                   j = update_block_idx(warm_order, t, n, config.seed) - 1;
                   probs.clear();
                 } else {
                   std::vector<double> scaled(ema);
                   probs = softmax_probabilities(scaled, ap.tau);
                   Rng rng(mix64(config.seed, t, kAdaptiveSalt));
                   j = sample_categorical(probs, rng.uniform());
                 }
                 event.probabilities = probs;
                 rec.active_block = static_cast<long>(j);
                 if (!block_step(obj, config, t, theta, partition.block(j), rec, guard)) {
                   return false;
                 }
                 const double z = ap.signed_ema ? rec.projected_grad : std::abs(rec.projected_grad);
                 ema[j] = ap.alpha * z + (1.0 - ap.alpha) * ema[j];
                 return true;
               });
}

RunResult mezo_bcd_adam_run(const Objective& obj, std::span<const double> theta0,
                            const OptimConfig& config,
                            const BlockPartition& partition, const StepHook& hook) {
  config.validate();
  check_start(obj, theta0);
  check_partition(obj, partition);
  if (config.order == BlockOrder::kAdaptive) {
    throw InputError("mezo_bcd_adam_run: adaptive order is not supported with Adam");
  }
  const std::size_t n = partition.num_blocks();
  const AdamParams& ap = config.adam;
  RunLog log;
  common_metadata(log, "mezo-bcd-adam", obj, config);
  log.metadata.emplace_back("order", std::string(block_order_name(config.order)));
  log.metadata.emplace_back("num_blocks", std::to_string(n));
  log.metadata.emplace_back("beta1", real_str(ap.beta1));
  log.metadata.emplace_back("beta2", real_str(ap.beta2));
  log.metadata.emplace_back("eps", real_str(ap.eps));
  log.metadata.emplace_back("interval", std::to_string(ap.interval));

  AdamState state;
  std::vector<double> g;
  std::vector<double> dir;

  return drive(obj, theta0, config, std::move(log), hook,
               [&](std::size_t t, std::span<double> theta, StepRecord& rec,
                   StepEvent& event, Guard& guard) {
                 const std::size_t tb = (t - 1) / ap.interval + 1;
                 const std::size_t j = update_block_idx(config.order, tb, n, config.seed) - 1;
                 const BlockRange range = partition.block(j);
                 event.block_switched = (t - 1) % ap.interval == 0;
                 if (event.block_switched) state.reset(range.size());
                 rec.active_block = static_cast<long>(j);

                 const PairLoss p = two_point_seeded(obj, theta, range, config.mu,
                                                     rec.step_seed, batch_seed(config.seed, t));
                 rec.loss_plus = p.plus;
                 rec.loss_minus = p.minus;
                 rec.projected_grad = projected(p, config.mu);
                 if (!guard.admit(rec)) return false;

                 g = direction_stream(rec.step_seed, range.size());
                 for (double& x : g) x *= rec.projected_grad;
                 dir.resize(range.size());
                 adam_direction(state, g, ap, dir);
                 const double lr = config.lr_at(t);
                 auto slice = theta.subspan(range.begin, range.size());
                 for (std::size_t i = 0; i < slice.size(); ++i) slice[i] -= lr * dir[i];
                 event.adam = &state;
                 return true;
               });
}

void write_runlog_csv(std::ostream& out, const RunLog& log) {
  out << "step,loss_plus,loss_minus,projected_grad,active_block,step_seed\n";
  for (const auto& r : log.records) {
    out << csv::row({std::to_string(r.step), csv::real(r.loss_plus),
                     csv::real(r.loss_minus), csv::real(r.projected_grad),
                     std::to_string(r.active_block), std::to_string(r.step_seed)})
        << '\n';
  }
}

void write_runlog_metadata(std::ostream& out, const RunLog& log, bool include_timing) {
  for (const auto& [key, value] : log.metadata) out << key << '=' << value << '\n';
  out << "records=" << log.records.size() << '\n';
  if (include_timing) out << "wall_time_seconds=" << csv::real(log.wall_time_seconds) << '\n';
}

}  // namespace subzero
