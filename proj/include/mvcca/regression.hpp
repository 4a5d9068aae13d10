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

#include "mvcca/linalg.hpp"
#include "mvcca/model.hpp"

namespace mvcca {

/// y_hat = weights . features + intercept, where features = F^T (x - c) for a
/// raw view vector x when the feature map F (and optionally c) is recorded.
struct LinearPredictor {
  Vector weights;
  double intercept = 0.0;
  std::optional<Matrix> feature_map;     // 3k x p
  std::optional<Vector> feature_center;  // 3k
};

enum class Evaluation { empirical, population };

struct LossReport {
  double mean_squared_error = 0.0;
  Index feature_dim = 0;
  Index labeled_count = 0;
  Evaluation evaluation = Evaluation::population;
  Index test_count = 0;  // empirical only
};

/// Least squares with intercept and an L2 penalty on the weights. Solved by
/// column-pivoted QR of the centered design (stacked with sqrt(ridge) I when
/// ridge > 0). Throws singular_design for a rank-deficient design at ridge 0.
LinearPredictor ols_fit(const Matrix& features, const Vector& targets, double ridge = 0.0);

LossReport empirical_loss(const LinearPredictor& pred, const Matrix& features,
                          const Vector& targets);

/// Exact expected square loss of pred under the given moments (zero means):
///   var_y - 2 w^T F^T s_xy + w^T F^T S_xx F w + (b - w^T F^T c)^2.
LossReport population_loss(const LinearPredictor& pred, const PopulationMoments& moments);

/// The loss-minimizing predictor on F^T x, from the population normal equations.
LinearPredictor optimal_predictor(const PopulationMoments& moments, const Matrix& feature_map);

}  // namespace mvcca
