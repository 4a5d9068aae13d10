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

#include "mvcca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "mvcca/error.hpp"

namespace mvcca {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::ill_conditioned: return "ill-conditioned";
    case ErrorKind::zero_matrix: return "zero matrix";
    case ErrorKind::empty_complement: return "empty complement";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::singular_design: return "singular design";
    case ErrorKind::degenerate_model: return "degenerate model";
    case ErrorKind::invalid_config: return "invalid config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigen_of(const Matrix& s, double ridge) {
  Matrix shifted = s;
  shifted.diagonal().array() += ridge;
  Eigen::SelfAdjointEigenSolver<Matrix> es(shifted);
  if (es.info() != Eigen::Success) {
    fail(ErrorKind::ill_conditioned, "symmetric eigendecomposition did not converge");
  }
  return es;
}

}  // namespace

PsdMatrix::PsdMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    fail(ErrorKind::invalid_input, "PSD matrix must be square and non-empty");
  }
  if (!m_.allFinite()) {
    fail(ErrorKind::invalid_input, "PSD matrix has non-finite entries");
  }
  const double scale = m_.cwiseAbs().maxCoeff();
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * (1.0 + scale)) {
    std::ostringstream os;
    os << "matrix is not symmetric (max asymmetry " << asym << ")";
    fail(ErrorKind::invalid_input, os.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo < -1e-8 * std::max(hi, 0.0)) {
    std::ostringstream os;
    os << "matrix is not positive semi-definite (eigenvalue " << lo << ")";
    fail(ErrorKind::invalid_input, os.str());
  }
}

OrthonormalBasis::OrthonormalBasis(Matrix basis) : b_(std::move(basis)) {
  if (b_.rows() == 0) fail(ErrorKind::invalid_input, "basis ambient dimension must be positive");
  if (b_.cols() > b_.rows()) fail(ErrorKind::invalid_input, "basis has more columns than rows");
  if (b_.cols() == 0) return;
  const Matrix gram = b_.transpose() * b_;
  const double err = (gram - Matrix::Identity(b_.cols(), b_.cols())).cwiseAbs().maxCoeff();
  if (!(err <= 1e-8)) {
    std::ostringstream os;
    os << "columns are not orthonormal (max deviation " << err << ")";
    fail(ErrorKind::invalid_input, os.str());
  }
}

OrthonormalBasis OrthonormalBasis::identity(Index n) {
  return OrthonormalBasis(Matrix::Identity(n, n));
}

OrthonormalBasis OrthonormalBasis::empty(Index n) {
  return OrthonormalBasis(Matrix(n, 0));
}

double default_ridge(const Matrix& s) {
  if (s.rows() == 0) return 0.0;
  return 1e-8 * s.trace() / static_cast<double>(s.rows());
}

PsdMatrix sym_sqrt(const PsdMatrix& s, double ridge) {
  if (ridge < 0.0) fail(ErrorKind::invalid_input, "ridge must be nonnegative");
  const auto es = eigen_of(s.matrix(), ridge);
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix& v = es.eigenvectors();
  Matrix q = v * root.asDiagonal() * v.transpose();
  q = (0.5 * (q + q.transpose())).eval();
  return PsdMatrix(std::move(q));
}

Matrix sym_inv_sqrt(const PsdMatrix& s, double ridge) {
  if (ridge < 0.0) fail(ErrorKind::invalid_input, "ridge must be nonnegative");
  const auto es = eigen_of(s.matrix(), ridge);
  const Vector& ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(hi > 0.0) || lo < 1e-12 * hi) {
    std::ostringstream os;
    os << "smallest eigenvalue " << lo << " is below 1e-12 of the largest (" << hi << ")";
    fail(ErrorKind::ill_conditioned, os.str());
  }
  const Vector inv_root = ev.cwiseSqrt().cwiseInverse();
  const Matrix& v = es.eigenvectors();
  Matrix w = v * inv_root.asDiagonal() * v.transpose();
  return 0.5 * (w + w.transpose());
}

OrthonormalBasis orthonormal_basis(const Matrix& a, double rank_tol) {
  if (a.rows() == 0 || a.cols() == 0) {
    fail(ErrorKind::zero_matrix, "cannot take the column space of an empty matrix");
  }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double top = sv(0);
  if (!(top >= 1e-14)) {
    fail(ErrorKind::zero_matrix, "all singular values are below 1e-14");
  }
  Index rank = 0;
  while (rank < sv.size() && sv(rank) >= rank_tol * top) ++rank;
  return OrthonormalBasis(svd.matrixU().leftCols(rank));
}

OrthonormalBasis orthonormal_complement(const OrthonormalBasis& b) {
  const Index n = b.ambient_dim();
  const Index m = b.size();
  if (m >= n) fail(ErrorKind::empty_complement, "basis already spans the ambient space");
  if (m == 0) return OrthonormalBasis::identity(n);
  Eigen::HouseholderQR<Matrix> qr(b.matrix());
  Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  // Re-project once to wash out the O(eps) leakage of the trailing columns.
  Matrix c = full.rightCols(n - m);
  c -= b.matrix() * (b.matrix().transpose() * c);
  Eigen::HouseholderQR<Matrix> clean(c);
  Matrix thin = clean.householderQ() * Matrix::Identity(n, n - m);
  return OrthonormalBasis(std::move(thin));
}

std::vector<double> principal_angles(const OrthonormalBasis& b1, const OrthonormalBasis& b2) {
  if (b1.ambient_dim() != b2.ambient_dim()) {
    fail(ErrorKind::invalid_input, "principal angles need bases in the same ambient space");
  }
  // Sines come from the larger basis' orthogonal projector applied to the smaller.
  const OrthonormalBasis& big = b1.size() >= b2.size() ? b1 : b2;
  const OrthonormalBasis& small = b1.size() >= b2.size() ? b2 : b1;
  const Index r = small.size();
  std::vector<double> angles;
  if (r == 0) return angles;

  const Matrix cross = big.matrix().transpose() * small.matrix();
  const Vector cosines = Eigen::JacobiSVD<Matrix>(cross).singularValues();
  const Matrix residual = small.matrix() - big.matrix() * cross;
  const Vector sines = Eigen::JacobiSVD<Matrix>(residual).singularValues();

  angles.reserve(static_cast<std::size_t>(r));
  for (Index i = 0; i < r; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines(r - 1 - i), 0.0, 1.0);
    angles.push_back(c * c > 0.5 ? std::asin(s) : std::acos(c));
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

double max_principal_angle(const OrthonormalBasis& b1, const OrthonormalBasis& b2) {
  const auto angles = principal_angles(b1, b2);
  return angles.empty() ? 0.0 : angles.back();
}

}  // namespace mvcca
