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

#include "mvcca/linalg.hpp"

namespace mvcca {

struct CovarianceEstimate {
  Vector mean;
  PsdMatrix covariance;
  Index sample_count = 0;
};

/// Column means and 1/(n-1) centered covariance; n >= 2.
CovarianceEstimate empirical_moments(const Matrix& data);

/// Full two-view CCA. Canonical variables of side a are rot_a^T x_a; the
/// first min(d_a, d_b) columns of each rotation pair up with `correlations`
/// (descending), the remaining columns complete each side's whitened basis.
struct CcaResult {
  Matrix rot_a;
  Matrix rot_b;
  Vector correlations;

  /// True when correlation k-1 and the first discarded value (k-th
  /// correlation, or 0 past the end) are within 1e-10: the top-k span is not
  /// well defined.
  bool boundary_tie(Index k) const;
};

enum class CcaSide { a, b };

/// W_a = (S_aa + ridge)^{-1/2}, W_b likewise; full SVD of W_a S_ab W_b = P D V^T;
/// rot_a = W_a P, rot_b = W_b V. Each singular pair is sign-fixed so the
/// largest-magnitude entry of the left vector is positive; unpaired columns
/// use their own largest entry.
CcaResult cca(const PsdMatrix& sigma_aa, const PsdMatrix& sigma_bb,
              const Matrix& sigma_ab, double ridge = 0.0);

/// First k columns of the chosen side's rotation.
Matrix reduce_view_top_k(const CcaResult& result, CcaSide side, Index k);

}  // namespace mvcca
