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

#include "subzero/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "subzero/csv.hpp"
#include "subzero/errors.hpp"
#include "subzero/parallel.hpp"
#include "subzero/rng.hpp"

namespace subzero {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Tr(Y^T H Y) using the block-diagonal layout of H.
double block_quadratic_trace(const Matrix& y, const QuadraticObjective& h) {
  const Matrix& dense = h.matrix().dense();
  const auto bs = static_cast<Eigen::Index>(h.hessian().block_size());
  double sum = 0.0;
  for (Eigen::Index o = 0; o < y.rows(); o += bs) {
    const auto yb = y.middleRows(o, bs);
    sum += (dense.block(o, o, bs, bs) * yb).cwiseProduct(yb).sum();
  }
  return sum;
}

double diagonal_sum(const SymMatrix& h, BlockRange r) {
  double sum = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) sum += h(i, i);
  return sum;
}

double masked_diagonal_sum(const SymMatrix& h, const std::vector<std::uint8_t>& mask) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) sum += h(i, i);
  }
  return sum;
}

void check_dim(const Perturbation& m, std::size_t d, const char* what) {
  if (perturbation_dim(m) != d) {
    std::ostringstream msg;
    msg << what << ": perturbation dimension " << perturbation_dim(m)
        << " does not match " << d;
    throw InputError(msg.str());
  }
}

double positive_lambda_max(double lambda_max) {
  if (!(lambda_max > 0.0)) {
    throw InputError("alignment undefined: lambda_max(H) is not positive");
  }
  return lambda_max;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  rng.fill_normal(std::span<double>(g.data(), rows * cols));
  return g;
}

}  // namespace

BlockPartition BlockPartition::equal(std::size_t dim, std::size_t num_blocks) {
  if (num_blocks == 0) throw InputError("partition: need at least one block");
  if (dim == 0 || dim % num_blocks != 0) {
    std::ostringstream msg;
    msg << "partition: dimension " << dim << " does not split into "
        << num_blocks << " equal blocks";
    throw InputError(msg.str());
  }
  std::vector<std::size_t> offsets(num_blocks + 1);
  for (std::size_t j = 0; j <= num_blocks; ++j) offsets[j] = j * (dim / num_blocks);
  return BlockPartition(std::move(offsets));
}

BlockPartition BlockPartition::from_sizes(std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw InputError("partition: need at least one block");
  std::vector<std::size_t> offsets{0};
  for (std::size_t s : sizes) {
    if (s == 0) throw InputError("partition: empty block");
    offsets.push_back(offsets.back() + s);
  }
  return BlockPartition(std::move(offsets));
}

bool BlockPartition::equal_size() const {
  const std::size_t first = block(0).size();
  for (std::size_t j = 1; j < num_blocks(); ++j) {
    if (block(j).size() != first) return false;
  }
  return true;
}

std::string_view ensemble_name(Ensemble e) {
  switch (e) {
    case Ensemble::kLowRank: return "low-rank";
    case Ensemble::kSparse: return "sparse";
    case Ensemble::kBlockSparse: return "block-sparse";
  }
  return "?";
}

Ensemble parse_ensemble(std::string_view name) {
  if (name == "low-rank") return Ensemble::kLowRank;
  if (name == "sparse") return Ensemble::kSparse;
  if (name == "block-sparse") return Ensemble::kBlockSparse;
  throw InputError("unknown ensemble '" + std::string(name) +
                   "' (expected low-rank, sparse or block-sparse)");
}

std::string_view sparse_mode_name(SparseMode m) {
  return m == SparseMode::kBernoulli ? "bernoulli" : "fixed";
}

SparseMode parse_sparse_mode(std::string_view name) {
  if (name == "bernoulli") return SparseMode::kBernoulli;
  if (name == "fixed") return SparseMode::kFixed;
  throw InputError("unknown sparse mode '" + std::string(name) + "'");
}

std::size_t perturbation_dim(const Perturbation& m) {
  return std::visit(
      Overloaded{
          [](const IdentityPerturbation& p) { return p.dim; },
          [](const LowRankPerturbation& p) {
            return static_cast<std::size_t>(p.basis.rows());
          },
          [](const SparseMaskPerturbation& p) { return p.mask.size(); },
          [](const BlockSparsePerturbation& p) { return p.dim; },
      },
      m);
}

double perturbation_srank(const Perturbation& m) {
  return std::visit(
      Overloaded{
          [](const IdentityPerturbation& p) { return static_cast<double>(p.dim); },
          [](const LowRankPerturbation& p) {
            return static_cast<double>(p.basis.cols());
          },
          [](const SparseMaskPerturbation& p) {
            return static_cast<double>(p.cardinality);
          },
          [](const BlockSparsePerturbation& p) {
            return static_cast<double>(p.range.size());
          },
      },
      m);
}

std::string perturbation_kind(const Perturbation& m) {
  return std::visit(
      Overloaded{
          [](const IdentityPerturbation&) { return std::string("identity"); },
          [](const LowRankPerturbation&) { return std::string("low-rank"); },
          [](const SparseMaskPerturbation&) { return std::string("sparse"); },
          [](const BlockSparsePerturbation&) { return std::string("block-sparse"); },
      },
      m);
}

Vector apply_M(const Perturbation& m, std::span<const double> u) {
  check_dim(m, u.size(), "apply_M");
  const Eigen::Map<const Vector> x(u.data(), static_cast<Eigen::Index>(u.size()));
  return std::visit(
      Overloaded{
          [&](const IdentityPerturbation&) -> Vector { return x; },
          [&](const LowRankPerturbation& p) -> Vector {
            return p.basis * (p.basis.transpose() * x);
          },
          [&](const SparseMaskPerturbation& p) -> Vector {
            Vector out = x;
            for (std::size_t i = 0; i < p.mask.size(); ++i) {
              if (p.mask[i] == 0) out(static_cast<Eigen::Index>(i)) = 0.0;
            }
            return out;
          },
          [&](const BlockSparsePerturbation& p) -> Vector {
            Vector out = Vector::Zero(x.size());
            const auto b = static_cast<Eigen::Index>(p.range.begin);
            const auto n = static_cast<Eigen::Index>(p.range.size());
            out.segment(b, n) = x.segment(b, n);
            return out;
          },
      },
      m);
}

Vector apply_basis(const LowRankPerturbation& m, std::span<const double> z) {
  if (static_cast<Eigen::Index>(z.size()) != m.basis.cols()) {
    throw InputError("apply_basis: coordinate vector length does not match rank");
  }
  return m.basis * Eigen::Map<const Vector>(z.data(), m.basis.cols());
}

Matrix dense_matrix(const Perturbation& m) {
  const auto d = static_cast<Eigen::Index>(perturbation_dim(m));
  return std::visit(
      Overloaded{
          [&](const IdentityPerturbation&) -> Matrix { return Matrix::Identity(d, d); },
          [&](const LowRankPerturbation& p) -> Matrix {
            return p.basis * p.basis.transpose();
          },
          [&](const SparseMaskPerturbation& p) -> Matrix {
            Matrix out = Matrix::Zero(d, d);
            for (Eigen::Index i = 0; i < d; ++i) {
              out(i, i) = p.mask[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;
            }
            return out;
          },
          [&](const BlockSparsePerturbation& p) -> Matrix {
            Matrix out = Matrix::Zero(d, d);
            for (std::size_t i = p.range.begin; i < p.range.end; ++i) {
              out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
            }
            return out;
          },
      },
      m);
}

Perturbation sample_low_rank(std::size_t d, std::size_t s, std::uint64_t seed) {
  if (s < 1 || s > d) {
    std::ostringstream msg;
    msg << "sample_low_rank: rank " << s << " outside [1, " << d << "]";
    throw InputError(msg.str());
  }
  Rng rng(seed);
  return LowRankPerturbation{orthonormalize(gaussian_matrix(d, s, rng))};
}

Perturbation sample_sparse(std::size_t d, double s, SparseMode mode,
                           std::uint64_t seed) {
  if (!(s > 0.0) || s > static_cast<double>(d)) {
    std::ostringstream msg;
    msg << "sample_sparse: srank " << s << " outside (0, " << d << "]";
    throw InputError(msg.str());
  }
  Rng rng(seed);
  SparseMaskPerturbation out{std::vector<std::uint8_t>(d, 0), 0};
  if (mode == SparseMode::kBernoulli) {
    const double p = s / static_cast<double>(d);
    for (auto& bit : out.mask) {
      bit = rng.uniform() < p ? 1 : 0;
      out.cardinality += bit;
    }
    return out;
  }
  const auto k = static_cast<std::size_t>(std::llround(s));
  if (k == 0) throw InputError("sample_sparse: round(s) is zero in fixed mode");
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(d - i));
    std::swap(idx[i], idx[j]);
    out.mask[idx[i]] = 1;
  }
  out.cardinality = k;
  return out;
}

Perturbation sample_block_sparse(const BlockPartition& partition,
                                 std::uint64_t seed) {
  if (partition.num_blocks() == 0) throw InputError("sample_block_sparse: empty partition");
  Rng rng(seed);
  const auto j = static_cast<std::size_t>(rng.below(partition.num_blocks()));
  return BlockSparsePerturbation{partition.dim(), j, partition.block(j)};
}

std::size_t controlled_eigenvector_count(std::size_t s, double gamma) {
  // The slack keeps products like 10 * 0.3 from rounding up past an integer.
  const double k = std::ceil(static_cast<double>(s) * gamma - 1e-9);
  return static_cast<std::size_t>(std::max(0.0, k));
}

Perturbation controlled_projection(const QuadraticObjective& h, std::size_t s,
                                   double gamma, std::uint64_t seed) {
  const std::size_t d = h.dim();
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw InputError("controlled_projection: gamma must lie in [0, 1]");
  }
  if (s < 1 || s > d) {
    std::ostringstream msg;
    msg << "controlled_projection: s = " << s << " outside [1, " << d << "]";
    throw InputError(msg.str());
  }
  const std::size_t k = controlled_eigenvector_count(s, gamma);
  const std::size_t available = h.numerical_rank();
  if (k > available) {
    std::ostringstream msg;
    msg << "controlled_projection: need " << k
        << " eigenvectors with nonzero eigenvalue, H has " << available;
    throw InputError(msg.str());
  }

  Rng rng(seed);
  std::vector<std::size_t> idx(available);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + static_cast<std::size_t>(rng.below(available - i))]);
  }

  const auto dd = static_cast<Eigen::Index>(d);
  Matrix basis(dd, static_cast<Eigen::Index>(s));
  const Matrix& q = h.spectrum().eigenvectors;
  for (std::size_t c = 0; c < k; ++c) {
    basis.col(static_cast<Eigen::Index>(c)) = q.col(static_cast<Eigen::Index>(idx[c]));
  }
  if (k < s) {
    Matrix r = gaussian_matrix(d, s - k, rng);
    if (k > 0) {
      const auto m1 = basis.leftCols(static_cast<Eigen::Index>(k));
      r -= m1 * (m1.transpose() * r);
    }
    basis.rightCols(static_cast<Eigen::Index>(s - k)) = orthonormalize(r);
  }
  return LowRankPerturbation{std::move(basis)};
}

double alignment_rho(const Perturbation& m, const QuadraticObjective& h) {
  check_dim(m, h.dim(), "alignment_rho");
  const double lambda_max = positive_lambda_max(h.lambda_max());
  const SymMatrix& hm = h.matrix();
  const double num = std::visit(
      Overloaded{
          [&](const IdentityPerturbation&) { return h.trace(); },
          [&](const LowRankPerturbation& p) { return block_quadratic_trace(p.basis, h); },
          [&](const SparseMaskPerturbation& p) { return masked_diagonal_sum(hm, p.mask); },
          [&](const BlockSparsePerturbation& p) { return diagonal_sum(hm, p.range); },
      },
      m);
  return num / lambda_max;
}

double alignment_rho(const Perturbation& m, const SymMatrix& h) {
  return alignment_rho(m, QuadraticObjective(Hessian{h, 1, 0}));
}

double alignment_rho_dense(const Perturbation& m, const SymMatrix& h,
                           double lambda_max) {
  check_dim(m, h.dim(), "alignment_rho_dense");
  positive_lambda_max(lambda_max);
  const Matrix dm = dense_matrix(m);
  return (dm.transpose() * h.dense() * dm).trace() / lambda_max;
}

double sketch_alignment_rho(const Matrix& g, const QuadraticObjective& h) {
  if (static_cast<std::size_t>(g.rows()) != h.dim()) {
    throw InputError("sketch_alignment_rho: dimension mismatch");
  }
  const double lambda_max = positive_lambda_max(h.lambda_max());
  const Eigen::Index s = g.cols();
  Matrix gram = Matrix::Zero(s, s);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(g.transpose());
  const Eigen::LLT<Matrix> chol(gram);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("sketch_alignment_rho: Gram matrix is not positive definite");
  }
  // Y = G L^{-T} has orthonormal columns spanning span(G).
  Matrix y = g;
  chol.matrixU().solveInPlace<Eigen::OnTheRight>(y);
  return block_quadratic_trace(y, h) / lambda_max;
}

double expected_rho(const QuadraticObjective& h, double s) {
  const double lambda_max = positive_lambda_max(h.lambda_max());
  const auto d = static_cast<double>(h.dim());
  if (!(s > 0.0) || s > d) throw InputError("expected_rho: s outside (0, d]");
  return s * h.trace() / (d * lambda_max);
}

double expected_rho(const SymMatrix& h, double s) {
  return expected_rho(QuadraticObjective(Hessian{h, 1, 0}), s);
}

double block_tail_probability(const QuadraticObjective& h,
                              const BlockPartition& partition, double rho_hat) {
  if (partition.dim() != h.dim()) {
    throw InputError("block_tail_probability: partition does not cover H");
  }
  if (!partition.equal_size()) {
    throw InputError("block_tail_probability: partition blocks differ in size");
  }
  const double lambda_max = positive_lambda_max(h.lambda_max());
  if (rho_hat <= 0.0) return 1.0;
  const double threshold = lambda_max * rho_hat;
  std::size_t good = 0;
  for (std::size_t j = 0; j < partition.num_blocks(); ++j) {
    if (diagonal_sum(h.matrix(), partition.block(j)) >= threshold) ++good;
  }
  return static_cast<double>(good) / static_cast<double>(partition.num_blocks());
}

double block_tail_probability(const SymMatrix& h, const BlockPartition& partition,
                              double rho_hat) {
  return block_tail_probability(QuadraticObjective(Hessian{h, 1, 0}), partition,
                                rho_hat);
}

std::vector<AlignmentSample> rho_distribution(Ensemble kind,
                                              const QuadraticObjective& h,
                                              double s, std::size_t n_trials,
                                              std::uint64_t seed,
                                              SparseMode sparse_mode,
                                              std::size_t threads) {
  const std::size_t d = h.dim();
  if (!(s > 0.0) || s > static_cast<double>(d)) {
    std::ostringstream msg;
    msg << "rho_distribution: s = " << s << " outside (0, " << d << "]";
    throw InputError(msg.str());
  }
  const auto s_int = static_cast<std::size_t>(std::llround(s));
  std::optional<BlockPartition> partition;
  if (kind == Ensemble::kLowRank && static_cast<double>(s_int) != s) {
    throw InputError("rho_distribution: low-rank srank must be an integer");
  }
  if (kind == Ensemble::kBlockSparse) {
    if (static_cast<double>(s_int) != s || d % s_int != 0) {
      std::ostringstream msg;
      msg << "rho_distribution: block size s = " << s
          << " does not divide d = " << d;
      throw InputError(msg.str());
    }
    partition = BlockPartition::equal(d, d / s_int);
  }

  std::vector<AlignmentSample> out(n_trials);
  parallel_for(n_trials, threads, [&](std::size_t trial) {
    const std::uint64_t trial_seed = mix64(seed, trial);
    double rho = 0.0;
    switch (kind) {
      case Ensemble::kLowRank: {
        // Same Gaussian draw as sample_low_rank(d, s, trial_seed); only the
        // route to Tr(U^T H U) differs.
        Rng rng(trial_seed);
        rho = sketch_alignment_rho(gaussian_matrix(d, s_int, rng), h);
        break;
      }
      case Ensemble::kSparse:
        rho = alignment_rho(sample_sparse(d, s, sparse_mode, trial_seed), h);
        break;
      case Ensemble::kBlockSparse:
        rho = alignment_rho(sample_block_sparse(*partition, trial_seed), h);
        break;
    }
    out[trial] = AlignmentSample{kind, s, trial, rho};
  });
  return out;
}

void write_alignment_csv(std::ostream& out,
                         std::span<const AlignmentSample> samples, bool header) {
  if (header) out << "ensemble,srank,trial,rho\n";
  for (const auto& a : samples) {
    out << csv::row({std::string(ensemble_name(a.kind)), csv::real(a.srank),
                     std::to_string(a.trial), csv::real(a.rho)})
        << '\n';
  }
}

}  // namespace subzero
