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

// Zeroth-order optimizers built on the two-point SPSA estimator
//
//     projected_grad = (L(theta + mu v) - L(theta - mu v)) / (2 mu),
//     g_hat          = projected_grad * v,
//
// where v = M u and u ~ N(0, I) is regenerated from a per-step seed rather
// than stored. Provided: ZO-SGD and subspace ZO-SGD, block-coordinate
// MeZO-BCD with fixed or cyclic-random block orders, adaptive (softmax over
// an EMA of projected gradients) block selection, and block-local Adam.
//
// Seeds: step t of a run with master seed S uses
//   step_seed  = mix64(S, t)          the Gaussian direction stream,
//   batch_seed = mix64(S, t, 0x42)    the minibatch,
//   mix64(S, t, 0x4d)                 the subspace M (subspace ZO-SGD),
//   mix64(S, t, 0xada)                the adaptive block draw,
//   mix64(S, w, 0xb10c)               the permutation of cycle w (cyclic-random).

#ifndef SUBZERO_ZO_OPTIM_HPP_
#define SUBZERO_ZO_OPTIM_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subzero/hessian.hpp"
#include "subzero/perturbation.hpp"

namespace subzero {

enum class BlockOrder { kAscending, kDescending, kFlipFlop, kCyclicRandom, kAdaptive };
enum class LrSchedule { kConstant, kInverseTime };

std::string_view block_order_name(BlockOrder o);
BlockOrder parse_block_order(std::string_view name);

struct AdaptiveParams {
  double alpha = 0.1;         // EMA decay
  double tau = 1.0;           // softmax temperature
  std::size_t warmup = 0;     // 0 selects 10 * N
  bool ascending_warmup = false;  // default warmup order is cyclic-random
  bool signed_ema = false;        // default EMA tracks |projected_grad|
};

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t interval = 50;  // steps spent on a block before switching
};

struct OptimConfig {
  double mu = 1e-3;
  double lr = 1e-3;
  LrSchedule schedule = LrSchedule::kConstant;  // inverse-time: lr / t
  std::size_t steps = 1000;
  BlockOrder order = BlockOrder::kCyclicRandom;
  std::uint64_t seed = 0;
  AdaptiveParams adaptive;
  AdamParams adam;
  // Low-rank subspace ZO-SGD: draw u in R^s and use U u instead of the
  // literal M u with u in R^d.
  bool subspace_coords = false;
  // Record the alignment of every drawn M (quadratic objectives only).
  bool measure_rho = false;
  // Abort once the loss exceeds this multiple of the first step's loss.
  double divergence_factor = 1e6;

  void validate() const;
  double lr_at(std::size_t t) const;
};

struct StepRecord {
  std::size_t step = 0;  // 1-based
  double loss_plus = 0.0;
  double loss_minus = 0.0;
  double projected_grad = 0.0;
  long active_block = -1;  // 0-based, -1 when the whole vector moves
  std::uint64_t step_seed = 0;
  double rho = std::numeric_limits<double>::quiet_NaN();
};

enum class RunStatus { kCompleted, kDiverged, kNonFinite };

struct RunLog {
  std::vector<StepRecord> records;
  std::vector<std::pair<std::string, std::string>> metadata;
  RunStatus status = RunStatus::kCompleted;
  std::string message;
  double wall_time_seconds = 0.0;
};

struct RunResult {
  RunLog log;
  std::vector<double> theta;  // parameters after the last step taken
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t local_step = 0;

  void reset(std::size_t n);
};

// Observer invoked after every step; `before` is the parameter vector at the
// start of the step. Only set for tests and diagnostics: it costs a copy of
// theta per step.
struct StepEvent {
  std::size_t step = 0;
  long active_block = -1;
  std::span<const double> before;
  std::span<const double> after;
  const AdamState* adam = nullptr;
  bool block_switched = false;
  std::span<const double> probabilities;  // adaptive runs after warmup
};
using StepHook = std::function<void(const StepEvent&)>;

// theta += mu * u with u the standard-normal stream of `seed`.
void perturb_parameters(std::span<double> theta, double mu, std::uint64_t seed);

// The first n variates of the stream perturb_parameters uses.
std::vector<double> direction_stream(std::uint64_t seed, std::size_t n);

// Two-point estimate along v = M u, u drawn from step_seed. theta is
// perturbed in place and restored before returning.
double spsa_gradient(const Objective& obj, std::span<double> theta,
                     const Perturbation& m, double mu, std::uint64_t step_seed,
                     std::uint64_t batch_seed);

// Two-point estimate along an explicit direction.
double spsa_gradient_along(const Objective& obj, std::span<double> theta,
                           std::span<const double> direction, double mu,
                           std::uint64_t batch_seed);

// Draws M for each step of subspace ZO-SGD.
class SubspaceSampler {
 public:
  static SubspaceSampler identity();
  static SubspaceSampler low_rank(std::size_t d, std::size_t s);
  static SubspaceSampler sparse(std::size_t d, double s, SparseMode mode);
  static SubspaceSampler block_sparse(BlockPartition partition);
  // `h` must outlive the sampler.
  static SubspaceSampler controlled(const QuadraticObjective& h, std::size_t s,
                                    double gamma);

  bool is_identity() const { return !draw_; }
  Perturbation draw(std::uint64_t seed) const { return draw_(seed); }
  const std::string& name() const { return name_; }

 private:
  std::function<Perturbation(std::uint64_t)> draw_;
  std::string name_;
};

// Block index in [1, N] for step t >= 1 (ascending, descending, flip-flop,
// cyclic-random). Cyclic-random shuffles 1..N once per window of N steps
// with a permutation derived from `seed`. Flip-flop with N = 1 returns 1.
std::size_t update_block_idx(BlockOrder order, std::size_t t, std::size_t n,
                             std::uint64_t seed = 0);

// Softmax of values / tau, shifted by the maximum for stability.
std::vector<double> softmax_probabilities(std::span<const double> values, double tau);
// Index k with cumulative probability first exceeding `uniform` in [0, 1).
std::size_t sample_categorical(std::span<const double> p, double uniform);

// Bias-corrected Adam step: updates `state` with g and writes
// m_hat / (sqrt(v_hat) + eps) into `direction`.
void adam_direction(AdamState& state, std::span<const double> g,
                    const AdamParams& params, std::span<double> direction);

RunResult zo_sgd_run(const Objective& obj, std::span<const double> theta0,
                     const OptimConfig& config, const SubspaceSampler& sampler,
                     const StepHook& hook = {});

RunResult mezo_bcd_run(const Objective& obj, std::span<const double> theta0,
                       const OptimConfig& config, const BlockPartition& partition,
                       const StepHook& hook = {});

RunResult adaptive_run(const Objective& obj, std::span<const double> theta0,
                       const OptimConfig& config, const BlockPartition& partition,
                       const StepHook& hook = {});

RunResult mezo_bcd_adam_run(const Objective& obj, std::span<const double> theta0,
                            const OptimConfig& config,
                            const BlockPartition& partition,
                            const StepHook& hook = {});

// Columns: step,loss_plus,loss_minus,projected_grad,active_block,step_seed.
void write_runlog_csv(std::ostream& out, const RunLog& log);
// key=value lines; wall time is included only when include_timing is set.
void write_runlog_metadata(std::ostream& out, const RunLog& log,
                           bool include_timing = false);

}  // namespace subzero

#endif  // SUBZERO_ZO_OPTIM_HPP_
