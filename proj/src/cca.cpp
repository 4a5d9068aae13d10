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

#include "mvcca/cca.hpp"

#include <algorithm>
#include <sstream>

#include "mvcca/error.hpp"
#include "mvcca/kernels.hpp"

namespace mvcca {

namespace {

Matrix whitener(const PsdMatrix& s, double ridge, const char* view) {
  try {
    return sym_inv_sqrt(s, ridge);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ill_conditioned) throw;
    std::ostringstream os;
    os << "marginal covariance of view " << view << " is ill-conditioned: " << e.what();
    fail(ErrorKind::ill_conditioned, os.str());
  }
}

Index argmax_abs(const Eigen::Ref<const Vector>& v) {
  Index best = 0;
  v.cwiseAbs().maxCoeff(&best);
  return best;
}

}  // namespace

CovarianceEstimate empirical_moments(const Matrix& data) {
  if (data.rows() < 2) fail(ErrorKind::insufficient_data, "need at least two samples");
  auto m = kernels::mean_and_covariance(data);
  return {std::move(m.mean), PsdMatrix(std::move(m.covariance)), data.rows()};
}

bool CcaResult::boundary_tie(Index k) const {
  if (k <= 0 || k > correlations.size()) return false;
  const double kept = correlations(k - 1);
  const double next = k < correlations.size() ? correlations(k) : 0.0;
  return kept - next < 1e-10;
}

CcaResult cca(const PsdMatrix& sigma_aa, const PsdMatrix& sigma_bb, const Matrix& sigma_ab,
              double ridge) {
  const Index da = sigma_aa.dim();
  const Index db = sigma_bb.dim();
  if (sigma_ab.rows() != da || sigma_ab.cols() != db) {
    fail(ErrorKind::invalid_input, "cross covariance must be d_a x d_b");
  }
  const Matrix wa = whitener(sigma_aa, ridge, "a");
  const Matrix wb = whitener(sigma_bb, ridge, "b");
  const Matrix t = wa * sigma_ab * wb;

  Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix p = svd.matrixU();
  Matrix v = svd.matrixV();
  const Index r = std::min(da, db);

  for (Index j = 0; j < r; ++j) {
    if (p(argmax_abs(p.col(j)), j) < 0.0) {
      p.col(j) = -p.col(j);
      v.col(j) = -v.col(j);
    }
  }
  for (Index j = r; j < da; ++j) {
    if (p(argmax_abs(p.col(j)), j) < 0.0) p.col(j) = -p.col(j);
  }
  for (Index j = r; j < db; ++j) {
    if (v(argmax_abs(v.col(j)), j) < 0.0) v.col(j) = -v.col(j);
  }

  CcaResult out;
  out.rot_a = wa * p;
  out.rot_b = wb * v;
  out.correlations = svd.singularValues().head(r).cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

Matrix reduce_view_top_k(const CcaResult& result, CcaSide side, Index k) {
  const Index limit = result.correlations.size();
  if (k < 1 || k > limit) {
    std::ostringstream os;
    os << "k = " << k << " is outside [1, " << limit << "]";
    fail(ErrorKind::invalid_input, os.str());
  }
  const Matrix& rot = side == CcaSide::a ? result.rot_a : result.rot_b;
  return rot.leftCols(k);
}

}  // namespace mvcca
