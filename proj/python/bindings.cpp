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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <string>
#include <vector>

#include "subzero/analysis.hpp"
#include "subzero/errors.hpp"
#include "subzero/harness.hpp"
#include "subzero/hessian.hpp"
#include "subzero/io.hpp"
#include "subzero/perturbation.hpp"
#include "subzero/rng.hpp"
#include "subzero/zo_optim.hpp"

namespace py = pybind11;
using namespace subzero;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto r = out.mutable_unchecked<2>();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = m(i, j);
  return out;
}

py::array_t<double> to_numpy(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::array_t<double> to_numpy(const Vector& v) {
  return py::array_t<double>(v.size(), v.data());
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw InputError("expected a 1-d array");
  return {a.data(), a.data() + a.size()};
}

Hessian hessian_from_numpy(const Array& a, std::size_t num_blocks, std::size_t rank) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1))
    throw InputError("expected a square 2-d array");
  const auto n = static_cast<Eigen::Index>(a.shape(0));
  Matrix m(n, n);
  auto r = a.unchecked<2>();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = r(i, j);
  return Hessian{SymMatrix::from_upper(m), num_blocks, rank};
}

py::dict run_to_dict(const RunResult& r) {
  const auto& recs = r.log.records;
  std::vector<double> plus, minus, grad;
  std::vector<long> block;
  std::vector<std::uint64_t> seeds;
  for (const auto& rec : recs) {
    plus.push_back(rec.loss_plus);
    minus.push_back(rec.loss_minus);
    grad.push_back(rec.projected_grad);
    block.push_back(rec.active_block);
    seeds.push_back(rec.step_seed);
  }
  py::dict d;
  d["loss_plus"] = to_numpy(plus);
  d["loss_minus"] = to_numpy(minus);
  d["projected_grad"] = to_numpy(grad);
  d["active_block"] = py::array_t<long>(static_cast<py::ssize_t>(block.size()), block.data());
  d["step_seed"] = py::array_t<std::uint64_t>(static_cast<py::ssize_t>(seeds.size()), seeds.data());
  d["theta"] = to_numpy(r.theta);
  d["status"] = r.log.status == RunStatus::kCompleted ? "completed"
                : r.log.status == RunStatus::kDiverged ? "diverged"
                                                       : "non-finite";
  d["message"] = r.log.message;
  py::dict meta;
  for (const auto& [k, v] : r.log.metadata) meta[py::str(k)] = v;
  d["metadata"] = meta;
  return d;
}

RunResult run(const QuadraticObjective& obj, const Array& theta0, const std::string& method,
              double lr, double mu, std::size_t steps, std::uint64_t seed,
              std::size_t num_blocks, const std::string& order,
              const std::string& ensemble, double srank, double gamma) {
  OptimConfig cfg;
  cfg.lr = lr;
  cfg.mu = mu;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.order = parse_block_order(order);
  cfg.validate();
  const auto theta = to_vector(theta0);
  const auto d = obj.dim();
  if (method == "zo-sgd") {
    if (gamma >= 0.0) {
      return zo_sgd_run(obj, theta, cfg,
                        SubspaceSampler::controlled(obj, static_cast<std::size_t>(srank), gamma));
    }
    if (ensemble == "identity") return zo_sgd_run(obj, theta, cfg, SubspaceSampler::identity());
    switch (parse_ensemble(ensemble)) {
      case Ensemble::kLowRank:
        return zo_sgd_run(obj, theta, cfg,
                          SubspaceSampler::low_rank(d, static_cast<std::size_t>(srank)));
      case Ensemble::kSparse:
        return zo_sgd_run(obj, theta, cfg,
                          SubspaceSampler::sparse(d, srank, SparseMode::kFixed));
      case Ensemble::kBlockSparse:
        return zo_sgd_run(obj, theta, cfg,
                          SubspaceSampler::block_sparse(BlockPartition::equal(d, num_blocks)));
    }
  }
  const auto partition = BlockPartition::equal(d, num_blocks);
  if (method == "mezo-bcd") return mezo_bcd_run(obj, theta, cfg, partition);
  if (method == "mezo-bcd-adam") return mezo_bcd_adam_run(obj, theta, cfg, partition);
  if (method == "mezo-bcd-adaptive") {
    cfg.order = BlockOrder::kAdaptive;
    return adaptive_run(obj, theta, cfg, partition);
  }
  throw InputError("unknown method '" + method + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Zeroth-order optimization toolkit: quadratic testbeds, "
            "subspace perturbations and MeZO-BCD runners.";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<AcceptanceError>(m, "AcceptanceError", PyExc_RuntimeError);

  m.def(
      "generate_hessian",
      [](std::size_t dim, std::size_t rank, std::size_t num_blocks,
         std::vector<double> max_eigenvalues, std::uint64_t seed) {
        HessianSpec spec{dim, rank, num_blocks, std::move(max_eigenvalues), seed};
        return to_numpy(generate_hessian(spec).matrix.dense());
      },
      py::arg("dim") = 256, py::arg("rank") = 64, py::arg("num_blocks") = 1,
      py::arg("max_eigenvalues") = std::vector<double>{10.0}, py::arg("seed") = 0);

  m.def(
      "heterogeneous_block_hessian",
      [](std::size_t dim, std::size_t num_blocks, std::size_t rank,
         const std::vector<double>& refs, std::uint64_t seed) {
        return to_numpy(heterogeneous_block_hessian(dim, num_blocks, rank, refs, seed).matrix.dense());
      },
      py::arg("dim") = 1024, py::arg("num_blocks") = 16, py::arg("rank") = 16,
      py::arg("refs") = std::vector<double>{10, 40, 70, 100}, py::arg("seed") = 0);

  m.def("mix64", [](std::uint64_t a, std::uint64_t b) { return mix64(a, b); });

  py::class_<QuadraticObjective>(m, "Quadratic")
      .def(py::init([](const Array& h, std::size_t num_blocks, std::size_t rank) {
             return QuadraticObjective(hessian_from_numpy(h, num_blocks, rank));
           }),
           py::arg("hessian"), py::arg("num_blocks") = 1, py::arg("rank") = 0)
      .def_property_readonly("dim", &QuadraticObjective::dim)
      .def_property_readonly("lambda_max", &QuadraticObjective::lambda_max)
      .def_property_readonly("trace", &QuadraticObjective::trace)
      .def_property_readonly("numerical_rank", &QuadraticObjective::numerical_rank)
      .def("loss", [](const QuadraticObjective& q, const Array& theta) {
        return q.loss(to_vector(theta));
      })
      .def("gradient", [](const QuadraticObjective& q, const Array& theta) {
        return to_numpy(q.gradient(to_vector(theta)));
      })
      .def("eigenvalues", [](const QuadraticObjective& q) {
        return to_numpy(q.spectrum().eigenvalues);
      })
      .def("expected_rho", [](const QuadraticObjective& q, double s) {
        return expected_rho(q, s);
      }, py::arg("srank"))
      .def("block_tail_probability",
           [](const QuadraticObjective& q, std::size_t num_blocks, double rho_hat) {
             return block_tail_probability(q, BlockPartition::equal(q.dim(), num_blocks), rho_hat);
           },
           py::arg("num_blocks"), py::arg("rho_hat"));

  m.def(
      "rho_distribution",
      [](const std::string& kind, const QuadraticObjective& h, double s,
         std::size_t trials, std::uint64_t seed, std::size_t threads) {
        const auto samples = rho_distribution(parse_ensemble(kind), h, s, trials, seed,
                                              SparseMode::kFixed, threads);
        std::vector<double> rho;
        rho.reserve(samples.size());
        for (const auto& x : samples) rho.push_back(x.rho);
        return to_numpy(rho);
      },
      py::arg("kind"), py::arg("quadratic"), py::arg("srank"), py::arg("trials") = 1000,
      py::arg("seed") = 0, py::arg("threads") = 1);

  m.def("update_block_idx",
        [](const std::string& order, std::size_t t, std::size_t n, std::uint64_t seed) {
          return update_block_idx(parse_block_order(order), t, n, seed);
        },
        py::arg("order"), py::arg("t"), py::arg("num_blocks"), py::arg("seed") = 0);

  m.def(
      "run",
      [](const QuadraticObjective& obj, const Array& theta0, const std::string& method,
         double lr, double mu, std::size_t steps, std::uint64_t seed, std::size_t num_blocks,
         const std::string& order, const std::string& ensemble, double srank, double gamma) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(obj, theta0, method, lr, mu, steps, seed, num_blocks, order, ensemble,
                  srank, gamma);
        }
        return run_to_dict(r);
      },
      py::arg("quadratic"), py::arg("theta0"), py::arg("method") = "zo-sgd",
      py::arg("lr") = 1e-3, py::arg("mu") = 1e-3, py::arg("steps") = 1000,
      py::arg("seed") = 0, py::arg("num_blocks") = 1, py::arg("order") = "cyclic-random",
      py::arg("ensemble") = "identity", py::arg("srank") = 64, py::arg("gamma") = -1.0);

  m.def(
      "peak_memory_params",
      [](const std::string& method, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& shapes,
         std::uint64_t rank, const std::vector<std::size_t>& blocks) {
        std::vector<LayerShape> layers;
        for (const auto& [rows, cols] : shapes) layers.push_back({rows, cols});
        const auto r = peak_memory_params(parse_memory_method(method), layers, rank, blocks);
        py::dict d;
        d["total"] = r.total_weights;
        d["auxiliary"] = r.auxiliary;
        d["peak"] = r.peak;
        return d;
      },
      py::arg("method"), py::arg("layers"), py::arg("rank") = 1,
      py::arg("block_assignment") = std::vector<std::size_t>{});

  m.def(
      "traffic_per_step",
      [](const std::string& method, double d, double n) {
        if (method == "mezo") return traffic_per_step(TrafficMethod::kMezo, d, n);
        if (method == "mezo-bcd") return traffic_per_step(TrafficMethod::kMezoBcd, d, n);
        throw InputError("unknown traffic method '" + method + "'");
      },
      py::arg("method"), py::arg("d"), py::arg("num_blocks"));

  m.def(
      "reproduce",
      [](const std::string& panel, const std::filesystem::path& out_dir, std::uint64_t seed,
         std::size_t threads) {
        harness::ReproduceOptions opts{out_dir, seed, threads, false};
        harness::PanelResult r;
        {
          py::gil_scoped_release release;
          r = harness::reproduce(panel, opts);
        }
        py::list checks;
        for (const auto& c : r.checks) checks.append(py::make_tuple(c.name, c.passed, c.detail));
        py::dict d;
        d["panel"] = r.panel;
        d["files"] = r.files;
        d["checks"] = checks;
        d["passed"] = r.passed();
        return d;
      },
      py::arg("panel"), py::arg("out_dir"), py::arg("seed") = 0, py::arg("threads") = 1);

  m.def("panel_names", &harness::panel_names);
  m.def("verify", [](const std::filesystem::path& dir) { return io::verify_manifest(dir); },
        py::arg("dir"), "Returns the list of manifest mismatches (empty when intact).");
}
