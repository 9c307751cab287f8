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

#include "subzero/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "subzero/errors.hpp"

namespace subzero {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kJacobiTol = 1e-12;

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

// One Jacobi rotation zeroing a(p, q). Columns are contiguous, so the
// column updates run first and are mirrored onto the rows afterwards.
void rotate(Matrix& a, Matrix& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const double tau = s / (1.0 + c);

  const Eigen::Index n = a.rows();
  double* cp = a.col(p).data();
  double* cq = a.col(q).data();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double g = cp[k];
    const double h = cq[k];
    cp[k] = g - s * (h + g * tau);
    cq[k] = h + s * (g - h * tau);
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    a(p, k) = cp[k];
    a(q, k) = cq[k];
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  double* vp = v.col(p).data();
  double* vq = v.col(q).data();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double g = vp[k];
    const double h = vq[k];
    vp[k] = g - s * (h + g * tau);
    vq[k] = h + s * (g - h * tau);
  }
}

}  // namespace

SymMatrix::SymMatrix(std::size_t dim)
    : m_(Matrix::Zero(static_cast<Eigen::Index>(dim),
                      static_cast<Eigen::Index>(dim))) {}

SymMatrix SymMatrix::from_upper(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw InputError("SymMatrix requires a square matrix");
  }
  SymMatrix out;
  out.m_ = a.triangularView<Eigen::Upper>();
  out.m_.triangularView<Eigen::StrictlyLower>() =
      out.m_.transpose().triangularView<Eigen::StrictlyLower>();
  return out;
}

SymMatrix SymMatrix::identity(std::size_t dim) {
  SymMatrix out(dim);
  out.m_.setIdentity();
  return out;
}

SymMatrix SymMatrix::diagonal(std::span<const double> diag) {
  SymMatrix out(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    out.m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
  }
  return out;
}

void SymMatrix::set(std::size_t i, std::size_t j, double value) {
  m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
  m_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
}

SymMatrix SymMatrix::scaled(double c) const {
  SymMatrix out;
  out.m_ = c * m_;
  return out;
}

EigenDecomp eig_sym(const SymMatrix& sym) {
  Matrix a = sym.dense();
  if (!a.allFinite()) {
    throw InputError("eig_sym: matrix has non-finite entries");
  }
  const Eigen::Index n = a.rows();
  Matrix v = Matrix::Identity(n, n);
  const double scale = a.norm();

  bool converged = false;
  double off = off_diagonal_norm(a);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off <= kJacobiTol * scale) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) != 0.0) rotate(a, v, p, q);
      }
    }
    off = off_diagonal_norm(a);
  }
  if (!converged && off > kJacobiTol * scale) {
    std::ostringstream msg;
    msg << "eig_sym: no convergence after " << kMaxSweeps
        << " sweeps, off-diagonal residual " << off << " (||A||_F = " << scale
        << ")";
    throw NumericalError(msg.str());
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i) > a(j, j);
  });
  EigenDecomp out{Vector(n), Matrix(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
  }
  return out;
}

Matrix orthonormalize(const Matrix& r) {
  const Eigen::Index d = r.rows();
  const Eigen::Index s = r.cols();
  if (s == 0) return Matrix(d, 0);
  if (s > d) {
    std::ostringstream msg;
    msg << "orthonormalize: " << s << " columns in dimension " << d
        << "; column " << d << " is linearly dependent";
    throw InputError(msg.str());
  }
  if (!r.allFinite()) throw InputError("orthonormalize: non-finite entries");

  const double max_norm = r.colwise().norm().maxCoeff();
  const double tol = 1e-12 * std::max(1.0, max_norm);

  Eigen::HouseholderQR<Matrix> qr(r);
  const Matrix& packed = qr.matrixQR();
  for (Eigen::Index k = 0; k < s; ++k) {
    if (std::abs(packed(k, k)) <= tol) {
      std::ostringstream msg;
      msg << "orthonormalize: column " << k
          << " is linearly dependent on the preceding columns (residual norm "
          << std::abs(packed(k, k)) << ")";
      throw InputError(msg.str());
    }
  }
  Matrix q = Matrix::Identity(d, s);
  q.applyOnTheLeft(qr.householderQ());
  for (Eigen::Index k = 0; k < s; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(q(i, k)) > 1e-13) {
        if (q(i, k) < 0.0) q.col(k) = -q.col(k);
        break;
      }
    }
  }
  return q;
}

double srank(const Matrix& a) {
  const double fro2 = a.squaredNorm();
  if (!(fro2 > 0.0)) throw InputError("srank: zero matrix has no stable rank");
  const Matrix gram = a.rows() <= a.cols() ? Matrix(a * a.transpose())
                                           : Matrix(a.transpose() * a);
  const double sigma_max2 = eig_sym(SymMatrix::from_upper(gram)).eigenvalues(0);
  return fro2 / sigma_max2;
}

double intdim(const SymMatrix& a, const EigenDecomp& eig) {
  const double op = std::max(std::abs(eig.eigenvalues(0)),
                             std::abs(eig.eigenvalues(eig.eigenvalues.size() - 1)));
  if (!(op > 0.0)) throw InputError("intdim: zero matrix has no intrinsic dimension");
  return a.trace() / op;
}

double intdim(const SymMatrix& a) {
  if (a.dim() == 0) throw InputError("intdim: empty matrix");
  return intdim(a, eig_sym(a));
}

}  // namespace subzero
