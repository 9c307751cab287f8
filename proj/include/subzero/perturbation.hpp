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

// Random subspace perturbations and subspace-alignment statistics.
//
// A perturbation stands for a d x d projection M (symmetric, idempotent):
// the identity, U U^T for U with orthonormal columns, or a diagonal 0/1
// mask. The alignment of M with a PSD H is
//
//     rho = Tr(M^T H M) / lambda_max(H),
//
// which reduces to Tr(U^T H U) / lambda_max for low-rank M and to the sum
// of the masked diagonal of H over lambda_max for masks.

#ifndef SUBZERO_PERTURBATION_HPP_
#define SUBZERO_PERTURBATION_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "subzero/hessian.hpp"
#include "subzero/linalg.hpp"

namespace subzero {

struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

// Contiguous, disjoint blocks covering [0, dim).
class BlockPartition {
 public:
  static BlockPartition equal(std::size_t dim, std::size_t num_blocks);
  static BlockPartition from_sizes(std::span<const std::size_t> sizes);

  std::size_t dim() const { return offsets_.back(); }
  std::size_t num_blocks() const { return offsets_.size() - 1; }
  BlockRange block(std::size_t j) const { return {offsets_[j], offsets_[j + 1]}; }
  bool equal_size() const;

 private:
  explicit BlockPartition(std::vector<std::size_t> offsets)
      : offsets_(std::move(offsets)) {}
  std::vector<std::size_t> offsets_;
};

struct IdentityPerturbation {
  std::size_t dim = 0;
};
struct LowRankPerturbation {
  Matrix basis;  // d x s, orthonormal columns
};
struct SparseMaskPerturbation {
  std::vector<std::uint8_t> mask;
  std::size_t cardinality = 0;
};
struct BlockSparsePerturbation {
  std::size_t dim = 0;
  std::size_t block = 0;  // 0-based
  BlockRange range;
};

using Perturbation = std::variant<IdentityPerturbation, LowRankPerturbation,
                                  SparseMaskPerturbation, BlockSparsePerturbation>;

enum class Ensemble { kLowRank, kSparse, kBlockSparse };
enum class SparseMode { kBernoulli, kFixed };

std::string_view ensemble_name(Ensemble e);
Ensemble parse_ensemble(std::string_view name);
std::string_view sparse_mode_name(SparseMode m);
SparseMode parse_sparse_mode(std::string_view name);

std::size_t perturbation_dim(const Perturbation& m);
// srank(M): s for low-rank, mask cardinality, block size, or d.
double perturbation_srank(const Perturbation& m);
std::string perturbation_kind(const Perturbation& m);

// M u for a d-dimensional u. Low-rank computes U (U^T u).
Vector apply_M(const Perturbation& m, std::span<const double> u);
// U z for an s-dimensional z (the cheaper low-rank variant).
Vector apply_basis(const LowRankPerturbation& m, std::span<const double> z);
// Materialized d x d matrix; for tests and the dense alignment fallback.
Matrix dense_matrix(const Perturbation& m);

// U from orthonormalizing a d x s standard Gaussian matrix.
Perturbation sample_low_rank(std::size_t d, std::size_t s, std::uint64_t seed);
// Bernoulli: each coordinate on with probability s/d. Fixed: exactly
// round(s) coordinates on, chosen uniformly.
Perturbation sample_sparse(std::size_t d, double s, SparseMode mode,
                           std::uint64_t seed);
// Indicator of one block chosen uniformly.
Perturbation sample_block_sparse(const BlockPartition& partition,
                                 std::uint64_t seed);

// ceil(s * gamma): how many Hessian eigenvectors a controlled projection uses.
std::size_t controlled_eigenvector_count(std::size_t s, double gamma);

// Low-rank M = [M1, M2] with M1 a random choice of ceil(s gamma) eigenvectors
// of H among those with nonzero eigenvalues and M2 an orthonormal basis of
// (I - M1 M1^T) R for Gaussian R.
Perturbation controlled_projection(const QuadraticObjective& h, std::size_t s,
                                   double gamma, std::uint64_t seed);

double alignment_rho(const Perturbation& m, const QuadraticObjective& h);
double alignment_rho(const Perturbation& m, const SymMatrix& h);
// Tr(M^T H M) / lambda_max with M materialized.
double alignment_rho_dense(const Perturbation& m, const SymMatrix& h,
                           double lambda_max);

// Alignment of M = G (G^T G)^{-1} G^T, the projection onto span(G), computed
// from the Gram matrix without forming an orthonormal basis. G is d x s.
double sketch_alignment_rho(const Matrix& g, const QuadraticObjective& h);

// s Tr(H) / (d lambda_max(H)).
double expected_rho(const QuadraticObjective& h, double s);
double expected_rho(const SymMatrix& h, double s);

// Exact P(rho >= rho_hat) for block-sparse M: the fraction of blocks whose
// diagonal sum reaches lambda_max * rho_hat (ties count).
double block_tail_probability(const QuadraticObjective& h,
                              const BlockPartition& partition, double rho_hat);
double block_tail_probability(const SymMatrix& h, const BlockPartition& partition,
                              double rho_hat);

struct AlignmentSample {
  Ensemble kind = Ensemble::kLowRank;
  double srank = 0.0;
  std::size_t trial = 0;
  double rho = 0.0;
};

// n_trials independent alignment draws. Trial i uses seed mix64(seed, i), so
// the result is identical for any thread count. Block-sparse uses the
// equal partition into blocks of size s (s must divide d).
std::vector<AlignmentSample> rho_distribution(
    Ensemble kind, const QuadraticObjective& h, double s, std::size_t n_trials,
    std::uint64_t seed, SparseMode sparse_mode = SparseMode::kFixed,
    std::size_t threads = 1);

// Header plus one row per sample: ensemble,srank,trial,rho.
void write_alignment_csv(std::ostream& out,
                         std::span<const AlignmentSample> samples,
                         bool header = true);

}  // namespace subzero

#endif  // SUBZERO_PERTURBATION_HPP_
