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

#include "mvcca/regression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvcca/error.hpp"

namespace mvcca {

LinearPredictor ols_fit(const Matrix& features, const Vector& targets, double ridge) {
  const Index n = features.rows();
  const Index p = features.cols();
  if (targets.size() != n) fail(ErrorKind::invalid_input, "targets must have one entry per row");
  if (n < 1) fail(ErrorKind::insufficient_data, "need at least one sample");
  if (ridge < 0.0) fail(ErrorKind::invalid_input, "ridge must be nonnegative");
  if (ridge == 0.0 && n < p + 1) {
    std::ostringstream os;
    os << n << " samples cannot determine " << p << " weights and an intercept";
    fail(ErrorKind::singular_design, os.str());
  }

  const Vector x_mean = features.colwise().mean().transpose();
  const double y_mean = targets.mean();

  LinearPredictor out;
  out.weights = Vector::Zero(p);
  if (p > 0) {
    Matrix design(ridge > 0.0 ? n + p : n, p);
    Vector rhs = Vector::Zero(design.rows());
    design.topRows(n) = features.rowwise() - x_mean.transpose();
    rhs.head(n) = targets.array() - y_mean;
    if (ridge > 0.0) design.bottomRows(p) = std::sqrt(ridge) * Matrix::Identity(p, p);

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(1e-12);
    if (qr.rank() < p) {
      std::ostringstream os;
      os << "design has rank " << qr.rank() << " < " << p;
      fail(ErrorKind::singular_design, os.str());
    }
    out.weights = qr.solve(rhs);
  }
  out.intercept = y_mean - x_mean.dot(out.weights);
  return out;
}

LossReport empirical_loss(const LinearPredictor& pred, const Matrix& features,
                          const Vector& targets) {
  if (features.cols() != pred.weights.size() || features.rows() != targets.size()) {
    fail(ErrorKind::invalid_input, "evaluation set does not match the predictor");
  }
  if (features.rows() < 1) fail(ErrorKind::insufficient_data, "empty evaluation set");
  const Vector residual =
      (targets - features * pred.weights).array() - pred.intercept;
  LossReport r;
  r.mean_squared_error = residual.squaredNorm() / static_cast<double>(targets.size());
  r.feature_dim = pred.weights.size();
  r.evaluation = Evaluation::empirical;
  r.test_count = targets.size();
  return r;
}

LossReport population_loss(const LinearPredictor& pred, const PopulationMoments& moments) {
  if (!pred.feature_map) fail(ErrorKind::invalid_input, "population loss needs a feature map");
  const Matrix& f = *pred.feature_map;
  if (f.rows() != moments.sigma_xx.rows() || f.cols() != pred.weights.size()) {
    fail(ErrorKind::invalid_input, "feature map is inconsistent with the moments or weights");
  }
  const Vector direction = f * pred.weights;  // predictor acts as direction^T x
  double offset = pred.intercept;
  if (pred.feature_center) {
    if (pred.feature_center->size() != f.rows()) {
      fail(ErrorKind::invalid_input, "feature center must have 3k entries");
    }
    offset -= direction.dot(*pred.feature_center);
  }
  const double loss = moments.var_y - 2.0 * direction.dot(moments.sigma_xy) +
                      direction.dot(moments.sigma_xx * direction) + offset * offset;
  LossReport r;
  r.mean_squared_error = std::max(loss, 0.0);
  r.feature_dim = pred.weights.size();
  r.evaluation = Evaluation::population;
  return r;
}

LinearPredictor optimal_predictor(const PopulationMoments& moments, const Matrix& feature_map) {
  if (feature_map.rows() != moments.sigma_xx.rows()) {
    fail(ErrorKind::invalid_input, "feature map rows must equal the feature dimension");
  }
  const Matrix g = feature_map.transpose() * moments.sigma_xx * feature_map;
  Eigen::LDLT<Matrix> ldlt(g);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    fail(ErrorKind::ill_conditioned, "restricted covariance is not positive definite");
  }
  LinearPredictor out;
  out.weights = ldlt.solve(feature_map.transpose() * moments.sigma_xy);
  out.feature_map = feature_map;
  return out;
}

}  // namespace mvcca
