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

// Dense real linear algebra: symmetric storage, Jacobi eigensolver,
// Householder orthonormalization, stable rank and intrinsic dimension.

#ifndef SUBZERO_LINALG_HPP_
#define SUBZERO_LINALG_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace subzero {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense symmetric matrix. Symmetry is exact: every write goes to both
// triangles, and construction from a general matrix mirrors its upper
// triangle onto the lower one.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);

  static SymMatrix from_upper(const Matrix& a);
  static SymMatrix identity(std::size_t dim);
  static SymMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  void set(std::size_t i, std::size_t j, double value);

  const Matrix& dense() const { return m_; }
  double trace() const { return m_.trace(); }
  double frobenius_norm() const { return m_.norm(); }

  SymMatrix scaled(double c) const;

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

struct EigenDecomp {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // orthonormal columns, column k pairs with eigenvalues[k]
};

// Cyclic Jacobi rotations. Converged once the off-diagonal Frobenius norm
// drops to 1e-12 * ||A||_F; gives up after 100 sweeps with NumericalError.
EigenDecomp eig_sym(const SymMatrix& a);

// Thin Q factor of a Householder QR of r (d x s, s <= d), with the sign of
// each column fixed so that its first nonzero entry is positive. Throws
// InputError naming the first column whose residual norm after projecting
// out the previous columns is at most 1e-12 (relative to the largest column
// norm when that exceeds one).
Matrix orthonormalize(const Matrix& r);

// sum(sigma_i^2) / sigma_max^2.
double srank(const Matrix& a);

// Tr(A) / ||A||_op for PSD A.
double intdim(const SymMatrix& a);
double intdim(const SymMatrix& a, const EigenDecomp& eig);

}  // namespace subzero

#endif  // SUBZERO_LINALG_HPP_
