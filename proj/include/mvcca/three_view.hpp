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

#include <optional>
#include <string>
#include <vector>

#include "mvcca/cca.hpp"
#include "mvcca/linalg.hpp"
#include "mvcca/model.hpp"

namespace mvcca {

/// Fused k-dimensional feature map for three k-dimensional views.
///
/// The directions with zero covariance with the hidden state are found from
/// two CCAs (view 1 vs views 2+3, view 3 vs views 1+2). Their span, mapped
/// through q = sigma_xx^{1/2}, is p2; p1 is its orthogonal complement and
/// u1 = q^{-1} p1. The columns of r_embedded are laid out as
///   [ 0    R12 ]
///   [ R11  R22 ]
///   [ R21  0   ]
/// i.e. each CCA's discarded directions sit on the rows of the views that
/// CCA actually acted on.
struct ThreeViewProjection {
  Index k = 0;
  Matrix u1;          // 3k x k
  PsdMatrix q;        // 3k x 3k
  Matrix r_embedded;  // 3k x 2k
  OrthonormalBasis p1;
  OrthonormalBasis p2;
  double r_smallest_singular_value = 0.0;  // of r_embedded with unit-norm columns
  Index fit_sample_count = 0;              // 0 when fitted from exact moments
  std::vector<std::string> warnings;
};

struct WeightingDiagnostics {
  double discarded_hidden_covariance_max = 0.0;
  std::optional<std::vector<double>> principal_angles_to_oracle;
  double r_rank_margin = 0.0;
};

/// Runs the optimal-weighting construction on a 3k x 3k covariance.
/// Throws degenerate_model when r_embedded's smallest singular value is
/// below 1e-8 of its largest.
ThreeViewProjection fit(const PsdMatrix& sigma_xx, Index k, double ridge = 0.0);

struct SampleFit {
  ThreeViewProjection projection;
  CovarianceEstimate moments;  // mean is the centering vector for transform
};

/// Fits on empirical moments of n x 3k samples with the default ridge.
SampleFit fit_samples(const Matrix& views, Index k);

/// (x - center) u1, row-wise.
Matrix transform(const ThreeViewProjection& proj, const Matrix& x, const Vector& center);

WeightingDiagnostics validate(const ThreeViewProjection& proj, const PopulationMoments& moments);

/// Sum of the three k-wide view blocks (no division).
Matrix average_views(const Matrix& x);

/// [I; I; I], the 3k x k feature map that average_views applies.
Matrix averaging_map(Index k);

/// Flat record: k, u1, q, r_embedded (row-major), r_smallest_singular_value,
/// fit_sample_count.
std::vector<double> to_flat_record(const ThreeViewProjection& proj);

}  // namespace mvcca
