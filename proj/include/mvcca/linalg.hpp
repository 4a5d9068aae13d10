// Copyright 2026 The mvcca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include <Eigen/Dense>

namespace mvcca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultRankTol = 1e-10;

/// Symmetric positive semi-definite matrix. Construction validates symmetry
/// (|S - S^T| <= 1e-10 (1 + max|S|)) and eigenvalues >= -1e-8 * largest.
class PsdMatrix {
 public:
  explicit PsdMatrix(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  Index dim() const noexcept { return m_.rows(); }

 private:
  Matrix m_;
};

/// Matrix with orthonormal columns; basis^T basis = I within 1e-8.
/// Zero columns is allowed and represents the trivial subspace.
class OrthonormalBasis {
 public:
  explicit OrthonormalBasis(Matrix basis);

  static OrthonormalBasis identity(Index n);
  static OrthonormalBasis empty(Index n);

  const Matrix& matrix() const noexcept { return b_; }
  Index ambient_dim() const noexcept { return b_.rows(); }
  Index size() const noexcept { return b_.cols(); }

 private:
  Matrix b_;
};

/// 1e-8 * trace(S) / dim, the ridge used for empirical covariances.
double default_ridge(const Matrix& s);

/// Symmetric root of S + ridge I, eigenvalues clamped at 0 before the root.
PsdMatrix sym_sqrt(const PsdMatrix& s, double ridge = 0.0);

/// Symmetric W with W (S + ridge I) W = I. Throws ill_conditioned when the
/// smallest eigenvalue of S + ridge I is below 1e-12 of the largest.
Matrix sym_inv_sqrt(const PsdMatrix& s, double ridge = 0.0);

/// Orthonormal basis of the column space of a; numerical rank counts
/// singular values >= rank_tol * largest.
OrthonormalBasis orthonormal_basis(const Matrix& a,
                                   double rank_tol = kDefaultRankTol);

OrthonormalBasis orthonormal_complement(const OrthonormalBasis& b);

/// Principal angles in radians, ascending, min(m1, m2) of them.
std::vector<double> principal_angles(const OrthonormalBasis& b1,
                                     const OrthonormalBasis& b2);

double max_principal_angle(const OrthonormalBasis& b1,
                           const OrthonormalBasis& b2);

}  // namespace mvcca
