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

#include "mvcca/three_view.hpp"

#include <sstream>

#include "mvcca/error.hpp"
#include "mvcca/kernels.hpp"

namespace mvcca {

namespace {

// Views 2+3 (or 1+2) as a contiguous 2k block of the 3k covariance.
struct Split {
  Index single;  // offset of the lone view
  Index pair;    // offset of the contiguous pair
};

// Discarded (zero-correlation) b-side directions of CCA(lone view, pair).
Matrix discarded_directions(const Matrix& s, Index k, Split split, double ridge,
                            const char* label, std::vector<std::string>& warnings) {
  const PsdMatrix saa(s.block(split.single, split.single, k, k));
  const PsdMatrix sbb(s.block(split.pair, split.pair, 2 * k, 2 * k));
  const Matrix sab = s.block(split.single, split.pair, k, 2 * k);
  const CcaResult res = cca(saa, sbb, sab, ridge);
  if (res.boundary_tie(k)) {
    std::ostringstream os;
    os << label << ": k-th canonical correlation " << res.correlations(k - 1)
       << " is indistinguishable from the discarded directions";
    warnings.push_back(os.str());
  }
  return res.rot_b.rightCols(k);
}

}  // namespace

ThreeViewProjection fit(const PsdMatrix& sigma_xx, Index k, double ridge) {
  const Matrix& s = sigma_xx.matrix();
  if (k < 1 || s.rows() != 3 * k) {
    std::ostringstream os;
    os << "covariance is " << s.rows() << " x " << s.cols() << ", expected 3k x 3k with k = " << k;
    fail(ErrorKind::invalid_input, os.str());
  }

  PsdMatrix q = sym_sqrt(sigma_xx, ridge);

  std::vector<std::string> warnings;
  const Matrix r1 = discarded_directions(s, k, {0, k}, ridge, "view 1 vs views 2,3", warnings);
  const Matrix r2 = discarded_directions(s, k, {2 * k, 0}, ridge, "view 3 vs views 1,2", warnings);

  Matrix r = Matrix::Zero(3 * k, 2 * k);
  r.block(k, 0, 2 * k, k) = r1;
  r.block(0, k, 2 * k, k) = r2;

  Matrix unit_cols = r;
  for (Index j = 0; j < unit_cols.cols(); ++j) unit_cols.col(j).normalize();
  const Vector sv = Eigen::JacobiSVD<Matrix>(unit_cols).singularValues();
  const double margin = sv(sv.size() - 1);
  if (!(margin >= 1e-8 * sv(0))) {
    std::ostringstream os;
    os << "embedded discard matrix is rank deficient (smallest singular value " << margin
       << ", largest " << sv(0) << ")";
    fail(ErrorKind::degenerate_model, os.str());
  }

  OrthonormalBasis p2 = orthonormal_basis(q.matrix() * r);
  if (p2.size() != 2 * k) {
    fail(ErrorKind::degenerate_model, "q * r_embedded lost rank");
  }
  OrthonormalBasis p1 = orthonormal_complement(p2);

  Eigen::LDLT<Matrix> q_solver(q.matrix());
  if (q_solver.info() != Eigen::Success) {
    fail(ErrorKind::ill_conditioned, "covariance square root is not invertible");
  }
  Matrix u1 = q_solver.solve(p1.matrix());
  if (!u1.allFinite()) {
    fail(ErrorKind::ill_conditioned, "covariance square root is not invertible");
  }

  return ThreeViewProjection{
      .k = k,
      .u1 = std::move(u1),
      .q = std::move(q),
      .r_embedded = std::move(r),
      .p1 = std::move(p1),
      .p2 = std::move(p2),
      .r_smallest_singular_value = margin,
      .fit_sample_count = 0,
      .warnings = std::move(warnings),
  };
}

SampleFit fit_samples(const Matrix& views, Index k) {
  if (views.cols() != 3 * k) fail(ErrorKind::invalid_input, "views must have 3k columns");
  CovarianceEstimate est = empirical_moments(views);
  ThreeViewProjection proj = fit(est.covariance, k, default_ridge(est.covariance.matrix()));
  proj.fit_sample_count = est.sample_count;
  return {std::move(proj), std::move(est)};
}

Matrix transform(const ThreeViewProjection& proj, const Matrix& x, const Vector& center) {
  if (x.cols() != proj.u1.rows() || center.size() != proj.u1.rows()) {
    fail(ErrorKind::invalid_input, "transform input must have 3k columns and a 3k center");
  }
  const Matrix centered = x.rowwise() - center.transpose();
  return kernels::project_rows(centered, proj.u1);
}

WeightingDiagnostics validate(const ThreeViewProjection& proj, const PopulationMoments& moments) {
  if (moments.sigma_xh.rows() != proj.r_embedded.rows()) {
    fail(ErrorKind::invalid_input, "moments dimension does not match the projection");
  }
  WeightingDiagnostics d;
  d.discarded_hidden_covariance_max =
      (proj.r_embedded.transpose() * moments.sigma_xh).cwiseAbs().maxCoeff();
  d.principal_angles_to_oracle =
      principal_angles(orthonormal_basis(proj.u1), oracle_subspace(moments));
  d.r_rank_margin = proj.r_smallest_singular_value;
  return d;
}

Matrix average_views(const Matrix& x) {
  if (x.cols() == 0 || x.cols() % 3 != 0) {
    fail(ErrorKind::invalid_input, "column count must be a positive multiple of 3");
  }
  const Index k = x.cols() / 3;
  return x.leftCols(k) + x.middleCols(k, k) + x.rightCols(k);
}

Matrix averaging_map(Index k) {
  Matrix m(3 * k, k);
  m << Matrix::Identity(k, k), Matrix::Identity(k, k), Matrix::Identity(k, k);
  return m;
}

std::vector<double> to_flat_record(const ThreeViewProjection& proj) {
  std::vector<double> out;
  const auto append = [&out](const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  };
  out.push_back(static_cast<double>(proj.k));
  append(proj.u1);
  append(proj.q.matrix());
  append(proj.r_embedded);
  out.push_back(proj.r_smallest_singular_value);
  out.push_back(static_cast<double>(proj.fit_sample_count));
  return out;
}

}  // namespace mvcca
