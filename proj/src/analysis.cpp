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

#include "subzero/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "subzero/csv.hpp"
#include "subzero/errors.hpp"

namespace subzero {

std::string_view memory_method_name(MemoryMethod m) {
  switch (m) {
    case MemoryMethod::kMezo: return "mezo";
    case MemoryMethod::kSparseMezo: return "sparse-mezo";
    case MemoryMethod::kLozo: return "lozo";
    case MemoryMethod::kMezoBcd: return "mezo-bcd";
  }
  return "?";
}

MemoryMethod parse_memory_method(std::string_view name) {
  if (name == "mezo") return MemoryMethod::kMezo;
  if (name == "sparse-mezo") return MemoryMethod::kSparseMezo;
  if (name == "lozo") return MemoryMethod::kLozo;
  if (name == "mezo-bcd") return MemoryMethod::kMezoBcd;
  throw InputError("unknown memory method '" + std::string(name) + "'");
}

MemoryReport peak_memory_params(MemoryMethod method, std::span<const LayerShape> layers,
                                std::uint64_t rank,
                                std::span<const std::size_t> block_assignment) {
  if (layers.empty()) throw InputError("peak_memory_params: no layers");
  std::uint64_t total = 0;
  std::uint64_t largest = 0;
  std::uint64_t max_rows = 0;
  std::uint64_t sum_cols = 0;
  for (const auto& l : layers) {
    if (l.m < 1 || l.n < 1) throw InputError("peak_memory_params: empty layer shape");
    total += l.size();
    largest = std::max(largest, l.size());
    max_rows = std::max(max_rows, l.m);
    sum_cols += l.n;
  }
  MemoryReport r;
  r.method = method;
  r.total_weights = total;
  switch (method) {
    case MemoryMethod::kMezo:
      r.auxiliary = largest;
      break;
    case MemoryMethod::kSparseMezo:
      r.auxiliary = 2 * largest;
      break;
    case MemoryMethod::kLozo:
      if (rank < 1) throw InputError("peak_memory_params: lozo needs rank >= 1");
      r.auxiliary = max_rows * rank + sum_cols * rank;
      break;
    case MemoryMethod::kMezoBcd: {
      if (block_assignment.size() != layers.size()) {
        throw InputError("peak_memory_params: mezo-bcd needs a block for each of the " +
                         std::to_string(layers.size()) + " layers, got " +
                         std::to_string(block_assignment.size()));
      }
      // Every block is selected eventually, so the peak auxiliary buffer is
      // the largest per-block maximum.
      const std::size_t nblocks =
          *std::max_element(block_assignment.begin(), block_assignment.end()) + 1;
      std::vector<std::uint64_t> block_max(nblocks, 0);
      for (std::size_t l = 0; l < layers.size(); ++l) {
        auto& b = block_max[block_assignment[l]];
        b = std::max(b, layers[l].size());
      }
      r.auxiliary = *std::max_element(block_max.begin(), block_max.end());
      break;
    }
  }
  r.peak = r.total_weights + r.auxiliary;
  return r;
}

std::string_view traffic_method_name(TrafficMethod m) {
  return m == TrafficMethod::kMezo ? "mezo" : "mezo-bcd";
}

double traffic_per_step(TrafficMethod method, double d, double num_blocks) {
  if (!(d >= 1.0)) throw InputError("traffic_per_step: d must be >= 1");
  if (!(num_blocks >= 1.0)) throw InputError("traffic_per_step: N must be >= 1");
  if (method == TrafficMethod::kMezo) return 5.0 * d;
  return 2.0 * d + 3.0 * d / num_blocks;
}

ModelLayout transformer_layout(std::uint64_t hidden, std::uint64_t num_layers,
                               std::uint64_t ffn, std::uint64_t vocab,
                               std::uint64_t positions) {
  if (hidden < 1 || num_layers < 1 || ffn < 1 || vocab < 1 || positions < 1) {
    throw InputError("transformer_layout: all sizes must be >= 1");
  }
  ModelLayout out;
  auto add = [&](std::string name, std::uint64_t m, std::uint64_t n, std::size_t block) {
    out.layers.push_back({m, n});
    out.block_assignment.push_back(block);
    out.names.push_back(std::move(name));
  };
  add("embed_tokens", vocab, hidden, 0);
  add("embed_positions", positions, hidden, 0);
  for (std::uint64_t l = 0; l < num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    const auto block = static_cast<std::size_t>(l + 1);
    add(p + "q_proj", hidden, hidden, block);
    add(p + "k_proj", hidden, hidden, block);
    add(p + "v_proj", hidden, hidden, block);
    add(p + "out_proj", hidden, hidden, block);
    add(p + "fc1", hidden, ffn, block);
    add(p + "fc2", ffn, hidden, block);
  }
  return out;
}

double loss_proxy(const StepRecord& r) { return 0.5 * (r.loss_plus + r.loss_minus); }

std::vector<double> loss_curve(const RunLog& log) {
  std::vector<double> out;
  out.reserve(log.records.size());
  for (const auto& r : log.records) out.push_back(loss_proxy(r));
  return out;
}

std::optional<std::size_t> iterations_to_target(std::span<const double> losses,
                                                double target) {
  if (losses.empty()) throw InputError("iterations_to_target: empty log");
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (losses[i] <= target) return i + 1;
  }
  return std::nullopt;
}

std::optional<std::size_t> iterations_to_target(const RunLog& log, double target) {
  const auto curve = loss_curve(log);
  return iterations_to_target(curve, target);
}

std::vector<double> mean_curve(std::span<const std::vector<double>> curves) {
  if (curves.empty()) throw InputError("mean_curve: no curves");
  const std::size_t n = curves.front().size();
  std::vector<double> out(n, 0.0);
  for (const auto& c : curves) {
    if (c.size() != n) throw InputError("mean_curve: curves differ in length");
    for (std::size_t i = 0; i < n; ++i) out[i] += c[i];
  }
  for (double& x : out) x /= static_cast<double>(curves.size());
  return out;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw InputError("summarize: no values");
  Summary s;
  s.count = values.size();
  s.min = values.front();
  s.max = values.front();
  double sum = 0.0;
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(s.count - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.count));
  }
  return s;
}

void write_memory_csv(std::ostream& out, std::span<const MemoryReport> reports) {
  out << "method,total,auxiliary,peak\n";
  for (const auto& r : reports) {
    out << csv::row({std::string(memory_method_name(r.method)),
                     std::to_string(r.total_weights), std::to_string(r.auxiliary),
                     std::to_string(r.peak)})
        << '\n';
  }
}

void write_traffic_csv(std::ostream& out, std::span<const TrafficRow> rows) {
  out << "method,d,N,traffic\n";
  for (const auto& r : rows) {
    out << csv::row({std::string(traffic_method_name(r.method)), std::to_string(r.d),
                     std::to_string(r.num_blocks), csv::real(r.traffic)})
        << '\n';
  }
}

}  // namespace subzero
