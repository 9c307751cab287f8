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

#include "subzero/hessian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "subzero/errors.hpp"
#include "subzero/rng.hpp"

namespace subzero {

namespace {

void check_layout(std::size_t dim, std::size_t num_blocks, std::size_t rank) {
  if (dim == 0 || num_blocks == 0) {
    throw InputError("hessian: dim and num_blocks must be positive");
  }
  if (dim % num_blocks != 0) {
    std::ostringstream msg;
    msg << "hessian: dim " << dim << " is not divisible by num_blocks "
        << num_blocks;
    throw InputError(msg.str());
  }
  if (rank > dim / num_blocks) {
    std::ostringstream msg;
    msg << "hessian: rank " << rank << " exceeds block size "
        << dim / num_blocks;
    throw InputError(msg.str());
  }
}

Matrix random_orthogonal(std::size_t n, Rng& rng) {
  const auto size = static_cast<Eigen::Index>(n);
  Matrix g(size, size);
  rng.fill_normal(std::span<double>(g.data(), n * n));
  return orthonormalize(g);
}

// Writes Q diag(eigs) Q^T into the diagonal block at `offset` (upper part
// only; the caller mirrors).
void place_block(Matrix& out, std::size_t offset, const Matrix& q,
                 const std::vector<double>& eigs) {
  const auto n = q.rows();
  Vector lambda(n);
  for (Eigen::Index i = 0; i < n; ++i) lambda(i) = eigs[static_cast<std::size_t>(i)];
  const Matrix block = q * lambda.asDiagonal() * q.transpose();
  const auto o = static_cast<Eigen::Index>(offset);
  out.block(o, o, n, n) = block;
}

}  // namespace

std::vector<double> linspace(double a, double b, std::size_t steps) {
  std::vector<double> out(steps);
  if (steps == 1) {
    out[0] = a;
    return out;
  }
  const double step = (b - a) / static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) {
    out[i] = a + step * static_cast<double>(i);
  }
  if (steps > 1) out.back() = b;
  return out;
}

Hessian generate_hessian(const HessianSpec& spec) {
  check_layout(spec.dim, spec.num_blocks, spec.rank);
  if (spec.max_eigenvalues.size() != spec.num_blocks) {
    std::ostringstream msg;
    msg << "generate_hessian: expected " << spec.num_blocks
        << " max eigenvalues, got " << spec.max_eigenvalues.size();
    throw InputError(msg.str());
  }
  for (double m : spec.max_eigenvalues) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw InputError("generate_hessian: max eigenvalues must be positive");
    }
  }
  const std::size_t bs = spec.dim / spec.num_blocks;
  Matrix full = Matrix::Zero(static_cast<Eigen::Index>(spec.dim),
                             static_cast<Eigen::Index>(spec.dim));
  for (std::size_t b = 0; b < spec.num_blocks; ++b) {
    Rng rng(mix64(spec.seed, b));
    const Matrix q = random_orthogonal(bs, rng);
    const double top = spec.max_eigenvalues[b];
    std::vector<double> eigs = linspace(top, 0.1 * top, spec.rank);
    eigs.resize(bs, 0.0);
    place_block(full, b * bs, q, eigs);
  }
  return Hessian{SymMatrix::from_upper(full), spec.num_blocks, spec.rank};
}

Hessian heterogeneous_block_hessian(std::size_t dim, std::size_t num_blocks,
                                    std::size_t rank,
                                    std::span<const double> ref_set,
                                    std::uint64_t seed) {
  check_layout(dim, num_blocks, rank);
  if (ref_set.empty()) {
    throw InputError("heterogeneous_block_hessian: empty reference set");
  }
  for (double ref : ref_set) {
    if (!(std::round(ref) - 2.0 > 0.0)) {
      throw InputError(
          "heterogeneous_block_hessian: references must exceed 2 so every "
          "eigenvalue stays positive");
    }
  }
  const std::size_t bs = dim / num_blocks;
  Matrix full = Matrix::Zero(static_cast<Eigen::Index>(dim),
                             static_cast<Eigen::Index>(dim));
  for (std::size_t b = 0; b < num_blocks; ++b) {
    Rng rng(mix64(seed, b));
    const double ref = std::round(ref_set[rng.below(ref_set.size())]);
    std::vector<double> eigs(rank);
    for (double& e : eigs) {
      e = ref + static_cast<double>(rng.below(5)) - 2.0;
    }
    std::sort(eigs.begin(), eigs.end(), std::greater<>());
    eigs.resize(bs, 0.0);
    const Matrix q = random_orthogonal(bs, rng);
    place_block(full, b * bs, q, eigs);
  }
  return Hessian{SymMatrix::from_upper(full), num_blocks, rank};
}

EigenDecomp block_spectrum(const Hessian& h) {
  const auto d = static_cast<Eigen::Index>(h.dim());
  const auto bs = static_cast<Eigen::Index>(h.block_size());
  Vector values(d);
  Matrix vectors = Matrix::Zero(d, d);
  for (Eigen::Index o = 0; o < d; o += bs) {
    const SymMatrix block =
        SymMatrix::from_upper(h.matrix.dense().block(o, o, bs, bs));
    const EigenDecomp e = eig_sym(block);
    values.segment(o, bs) = e.eigenvalues;
    vectors.block(o, o, bs, bs) = e.eigenvectors;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values(a) > values(b);
  });
  EigenDecomp out{Vector(d), Matrix(d, d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    out.eigenvalues(k) = values(order[static_cast<std::size_t>(k)]);
    out.eigenvectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

QuadraticObjective::QuadraticObjective(Hessian h) : hessian_(std::move(h)) {
  if (hessian_.dim() == 0) throw InputError("quadratic: empty Hessian");
  if (hessian_.num_blocks == 0 || hessian_.dim() % hessian_.num_blocks != 0) {
    throw InputError("quadratic: block count does not divide the dimension");
  }
  spectrum_ = block_spectrum(hessian_);
  lambda_max_ = spectrum_.eigenvalues(0);
  trace_ = hessian_.matrix.trace();
  const double lambda_min = spectrum_.eigenvalues(spectrum_.eigenvalues.size() - 1);
  if (lambda_min < -1e-9 * std::max(lambda_max_, 0.0)) {
    std::ostringstream msg;
    msg << "quadratic: Hessian is not PSD (smallest eigenvalue " << lambda_min
        << ")";
    throw InputError(msg.str());
  }
}

double QuadraticObjective::loss(std::span<const double> theta) const {
  if (theta.size() != dim()) {
    std::ostringstream msg;
    msg << "quadratic_loss: parameter dimension " << theta.size()
        << " does not match Hessian dimension " << dim();
    throw InputError(msg.str());
  }
  const auto bs = static_cast<Eigen::Index>(hessian_.block_size());
  const Eigen::Map<const Vector> t(theta.data(), static_cast<Eigen::Index>(theta.size()));
  const Matrix& h = hessian_.matrix.dense();
  double sum = 0.0;
  for (Eigen::Index o = 0; o < t.size(); o += bs) {
    const auto seg = t.segment(o, bs);
    sum += seg.dot(h.block(o, o, bs, bs) * seg);
  }
  return 0.5 * sum;
}

Vector QuadraticObjective::gradient(std::span<const double> theta) const {
  if (theta.size() != dim()) throw InputError("gradient: dimension mismatch");
  const Eigen::Map<const Vector> t(theta.data(), static_cast<Eigen::Index>(theta.size()));
  const auto bs = static_cast<Eigen::Index>(hessian_.block_size());
  const Matrix& h = hessian_.matrix.dense();
  Vector g(t.size());
  for (Eigen::Index o = 0; o < t.size(); o += bs) {
    g.segment(o, bs) = h.block(o, o, bs, bs) * t.segment(o, bs);
  }
  return g;
}

std::string QuadraticObjective::id() const {
  std::ostringstream out;
  out << "quadratic(d=" << dim() << ",blocks=" << hessian_.num_blocks
      << ",rank=" << hessian_.rank << ")";
  return out.str();
}

std::size_t QuadraticObjective::numerical_rank() const {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < spectrum_.eigenvalues.size(); ++i) {
    if (spectrum_.eigenvalues(i) > 1e-9 * lambda_max_) ++n;
  }
  return n;
}

LogisticObjective::LogisticObjective(RowMatrix features,
                                     std::vector<double> labels,
                                     std::size_t batch_size)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      batch_size_(batch_size) {
  if (labels_.empty() || features_.rows() == 0) {
    throw InputError("logistic: empty dataset");
  }
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw InputError("logistic: feature rows and labels differ in length");
  }
  for (double y : labels_) {
    if (y != 1.0 && y != -1.0) throw InputError("logistic: labels must be +/-1");
  }
}

LogisticObjective LogisticObjective::synthetic(const LogisticDataSpec& spec,
                                               std::size_t batch_size) {
  if (spec.num_samples == 0 || spec.dim == 0) {
    throw InputError("logistic: empty dataset");
  }
  Rng rng(spec.seed);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  Vector w(d);
  rng.fill_normal(std::span<double>(w.data(), spec.dim));
  w.normalize();
  RowMatrix x(static_cast<Eigen::Index>(spec.num_samples), d);
  std::vector<double> y(spec.num_samples);
  for (std::size_t i = 0; i < spec.num_samples; ++i) {
    y[i] = (rng.next_u64() >> 63) != 0 ? 1.0 : -1.0;
    auto row = x.row(static_cast<Eigen::Index>(i));
    for (Eigen::Index j = 0; j < d; ++j) row(j) = rng.normal();
    row += (y[i] * spec.separation) * w.transpose();
  }
  return LogisticObjective(std::move(x), std::move(y), batch_size);
}

double LogisticObjective::example_loss(std::size_t i,
                                       const Eigen::Map<const Vector>& theta) const {
  const double margin =
      labels_[i] * features_.row(static_cast<Eigen::Index>(i)).dot(theta);
  // log(1 + exp(-m)) without overflow.
  return std::max(-margin, 0.0) + std::log1p(std::exp(-std::abs(margin)));
}

double LogisticObjective::loss(std::span<const double> theta,
                               std::uint64_t batch_seed) const {
  if (theta.size() != dim()) throw InputError("logistic: dimension mismatch");
  const Eigen::Map<const Vector> t(theta.data(), static_cast<Eigen::Index>(theta.size()));
  const std::size_t n = labels_.size();
  if (batch_size_ == 0 || batch_size_ >= n) return full_loss(theta);
  Rng rng(batch_seed);
  double sum = 0.0;
  for (std::size_t k = 0; k < batch_size_; ++k) {
    sum += example_loss(static_cast<std::size_t>(rng.below(n)), t);
  }
  return sum / static_cast<double>(batch_size_);
}

double LogisticObjective::full_loss(std::span<const double> theta) const {
  if (theta.size() != dim()) throw InputError("logistic: dimension mismatch");
  const Eigen::Map<const Vector> t(theta.data(), static_cast<Eigen::Index>(theta.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) sum += example_loss(i, t);
  return sum / static_cast<double>(labels_.size());
}

double LogisticObjective::accuracy(std::span<const double> theta) const {
  if (theta.size() != dim()) throw InputError("logistic: dimension mismatch");
  const Eigen::Map<const Vector> t(theta.data(), static_cast<Eigen::Index>(theta.size()));
  const Vector scores = features_ * t;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (scores(static_cast<Eigen::Index>(i)) * labels_[i] > 0.0) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels_.size());
}

std::string LogisticObjective::id() const {
  std::ostringstream out;
  out << "logistic(n=" << labels_.size() << ",d=" << dim()
      << ",batch=" << batch_size_ << ")";
  return out.str();
}

}  // namespace subzero
