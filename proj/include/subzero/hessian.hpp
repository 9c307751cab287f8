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

// Objectives for optimization runs: the randomized block-diagonal quadratic
// testbed and a small minibatched logistic-regression objective.

#ifndef SUBZERO_HESSIAN_HPP_
#define SUBZERO_HESSIAN_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "subzero/linalg.hpp"

namespace subzero {

struct HessianSpec {
  std::size_t dim = 256;
  std::size_t rank = 64;        // nonzero eigenvalues per block
  std::size_t num_blocks = 1;
  std::vector<double> max_eigenvalues{10.0};  // one per block
  std::uint64_t seed = 0;
};

// Dense symmetric matrix plus the block layout it was generated with.
// Entries across block boundaries are exactly zero.
struct Hessian {
  SymMatrix matrix;
  std::size_t num_blocks = 1;
  std::size_t rank = 0;

  std::size_t dim() const { return matrix.dim(); }
  std::size_t block_size() const { return matrix.dim() / num_blocks; }
};

// steps evenly spaced values from a to b inclusive; steps == 1 yields {a}.
std::vector<double> linspace(double a, double b, std::size_t steps);

// Block-diagonal PSD matrix whose i-th block is Q_i diag(lambda_i) Q_i^T
// with lambda_i = linspace(max_i, 0.1 max_i, rank) padded with zeros and
// Q_i a random orthogonal matrix.
Hessian generate_hessian(const HessianSpec& spec);

// Block-diagonal PSD matrix where each block picks a reference value from
// ref_set uniformly and draws each of its rank nonzero eigenvalues as an
// integer in [ref - 2, ref + 2].
Hessian heterogeneous_block_hessian(std::size_t dim, std::size_t num_blocks,
                                    std::size_t rank,
                                    std::span<const double> ref_set,
                                    std::uint64_t seed);

// Eigendecomposition computed one diagonal block at a time.
EigenDecomp block_spectrum(const Hessian& h);

// A loss over a flat parameter vector. batch_seed selects the minibatch for
// stochastic objectives and is ignored by deterministic ones.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dim() const = 0;
  virtual double loss(std::span<const double> theta,
                      std::uint64_t batch_seed) const = 0;
  virtual std::string id() const = 0;
};

// L(theta) = 0.5 theta^T H theta with cached spectrum.
class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(Hessian h);

  std::size_t dim() const override { return hessian_.dim(); }
  double loss(std::span<const double> theta, std::uint64_t) const override {
    return loss(theta);
  }
  double loss(std::span<const double> theta) const;
  std::string id() const override;

  // H theta.
  Vector gradient(std::span<const double> theta) const;

  const Hessian& hessian() const { return hessian_; }
  const SymMatrix& matrix() const { return hessian_.matrix; }
  const EigenDecomp& spectrum() const { return spectrum_; }
  double lambda_max() const { return lambda_max_; }
  double trace() const { return trace_; }
  // Number of eigenvalues above 1e-9 * lambda_max.
  std::size_t numerical_rank() const;

 private:
  Hessian hessian_;
  EigenDecomp spectrum_;
  double lambda_max_ = 0.0;
  double trace_ = 0.0;
};

// Probit of 0.95: class means at +/- this distance along a unit direction
// give 95% Bayes accuracy under unit isotropic noise.
inline constexpr double kSeparation95 = 1.6448536269514722;

struct LogisticDataSpec {
  std::size_t num_samples = 2000;
  std::size_t dim = 200;
  double separation = kSeparation95;
  std::uint64_t seed = 0;
};

// Mean logistic loss log(1 + exp(-y x^T theta)) over a minibatch of
// batch_size rows drawn with replacement from a stream seeded by the batch
// seed. batch_size 0 (or >= num_samples) means the full dataset.
class LogisticObjective final : public Objective {
 public:
  using RowMatrix =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  LogisticObjective(RowMatrix features, std::vector<double> labels,
                    std::size_t batch_size);

  // Two Gaussian clusters at +/- separation * w for a random unit w.
  static LogisticObjective synthetic(const LogisticDataSpec& spec,
                                     std::size_t batch_size);

  std::size_t dim() const override {
    return static_cast<std::size_t>(features_.cols());
  }
  std::size_t num_samples() const { return labels_.size(); }
  double loss(std::span<const double> theta,
              std::uint64_t batch_seed) const override;
  double full_loss(std::span<const double> theta) const;
  double accuracy(std::span<const double> theta) const;
  std::string id() const override;

  const RowMatrix& features() const { return features_; }
  const std::vector<double>& labels() const { return labels_; }

 private:
  double example_loss(std::size_t i, const Eigen::Map<const Vector>& theta) const;

  RowMatrix features_;
  std::vector<double> labels_;
  std::size_t batch_size_;
};

}  // namespace subzero

#endif  // SUBZERO_HESSIAN_HPP_
