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

// Closed-form cost models and run summaries.
//
// Memory counts follow the per-method peak formulas for weight storage
// only (activations and buffers excluded). Traffic counts parameter loads
// per optimizer step. Both are parameter counts, not bytes.

#ifndef SUBZERO_ANALYSIS_HPP_
#define SUBZERO_ANALYSIS_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subzero/zo_optim.hpp"

namespace subzero {

struct LayerShape {
  std::uint64_t m = 1;
  std::uint64_t n = 1;
  std::uint64_t size() const { return m * n; }
};

enum class MemoryMethod { kMezo, kSparseMezo, kLozo, kMezoBcd };
std::string_view memory_method_name(MemoryMethod m);
MemoryMethod parse_memory_method(std::string_view name);

struct MemoryReport {
  MemoryMethod method = MemoryMethod::kMezo;
  std::uint64_t total_weights = 0;
  std::uint64_t auxiliary = 0;
  std::uint64_t peak = 0;
};

// `rank` is used by LoZO only. `block_assignment[l]` is the block holding
// layer l and is required (one entry per layer) for MeZO-BCD.
MemoryReport peak_memory_params(MemoryMethod method, std::span<const LayerShape> layers,
                                std::uint64_t rank = 1,
                                std::span<const std::size_t> block_assignment = {});

enum class TrafficMethod { kMezo, kMezoBcd };
std::string_view traffic_method_name(TrafficMethod m);

// 5d for MeZO, 2d + 3d/N for MeZO-BCD.
double traffic_per_step(TrafficMethod method, double d, double num_blocks);

struct TrafficRow {
  TrafficMethod method = TrafficMethod::kMezo;
  std::uint64_t d = 0;
  std::uint64_t num_blocks = 1;
  double traffic = 0.0;
};

// A decoder-only transformer with the given widths: token and position
// embeddings, then per layer q/k/v/o projections and two MLP matrices.
// Each transformer layer is one block; embeddings form block 0.
struct ModelLayout {
  std::vector<LayerShape> layers;
  std::vector<std::size_t> block_assignment;
  std::vector<std::string> names;
};
ModelLayout transformer_layout(std::uint64_t hidden, std::uint64_t num_layers,
                               std::uint64_t ffn, std::uint64_t vocab,
                               std::uint64_t positions);

// The unperturbed loss is never evaluated by the optimizers, so curves use
// the midpoint of the two perturbed losses.
double loss_proxy(const StepRecord& r);
std::vector<double> loss_curve(const RunLog& log);

// First 1-based step whose loss is <= target, or nullopt.
std::optional<std::size_t> iterations_to_target(std::span<const double> losses,
                                                double target);
std::optional<std::size_t> iterations_to_target(const RunLog& log, double target);

// Pointwise mean of equal-length curves.
std::vector<double> mean_curve(std::span<const std::vector<double>> curves);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased, 0 for a single sample
  double std_error = 0.0;
  double min = 0.0;
  double max = 0.0;
};
Summary summarize(std::span<const double> values);

void write_memory_csv(std::ostream& out, std::span<const MemoryReport> reports);
void write_traffic_csv(std::ostream& out, std::span<const TrafficRow> rows);

}  // namespace subzero

#endif  // SUBZERO_ANALYSIS_HPP_
