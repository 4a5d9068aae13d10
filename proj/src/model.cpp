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

#include "mvcca/model.hpp"

#include <cmath>
#include <sstream>

#include "mvcca/error.hpp"
#include "mvcca/kernels.hpp"
#include "mvcca/rng.hpp"

namespace mvcca {

namespace {

Matrix gaussian_matrix(Index rows, Index cols, Engine& eng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(eng);
  return m;
}

double smallest_singular_value(const Matrix& a) {
  return Eigen::JacobiSVD<Matrix>(a).singularValues().minCoeff();
}

Matrix haar_orthogonal(Index k, Engine& eng) {
  const Matrix z = gaussian_matrix(k, k, eng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(k, k);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < k; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

void check_subspace_conditioning(const Matrix& g, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || lo < 1e-12 * hi) {
    std::ostringstream os;
    os << what << " is singular (eigenvalue " << lo << ", largest " << hi << ")";
    fail(ErrorKind::ill_conditioned, os.str());
  }
}

}  // namespace

void GaussianThreeViewModel::validate() const {
  if (k < 1) fail(ErrorKind::invalid_input, "hidden dimension must be positive");
  if (beta.size() != k) fail(ErrorKind::invalid_input, "beta must have length k");
  for (int i = 0; i < 3; ++i) {
    const Matrix& a = loadings[static_cast<std::size_t>(i)];
    if (a.rows() != k || a.cols() != k) {
      fail(ErrorKind::invalid_input, "every loading must be k x k");
    }
    if (!(smallest_singular_value(a) > 1e-8)) {
      std::ostringstream os;
      os << "loading of view " << i + 1 << " is rank deficient";
      fail(ErrorKind::invalid_input, os.str());
    }
    if (!(view_noise_sd[static_cast<std::size_t>(i)] > 0.0)) {
      fail(ErrorKind::invalid_input, "view noise scales must be positive");
    }
  }
  if (!(y_noise_sd > 0.0)) fail(ErrorKind::invalid_input, "label noise scale must be positive");
}

GaussianThreeViewModel random_model(Index k, std::uint64_t seed, const ModelOptions& options) {
  if (k < 1) fail(ErrorKind::invalid_input, "hidden dimension must be positive");
  Engine eng = make_engine(derive_seed(seed, "model"));
  GaussianThreeViewModel model;
  model.k = k;
  for (auto& a : model.loadings) {
    if (options.loading == LoadingKind::orthogonal) {
      a = haar_orthogonal(k, eng);
    } else {
      do {
        a = gaussian_matrix(k, k, eng);
      } while (!(smallest_singular_value(a) > 1e-8));
    }
  }
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(k)));
  model.beta.resize(k);
  for (Index j = 0; j < k; ++j) model.beta(j) = normal(eng);
  model.view_noise_sd = options.view_noise_sd;
  model.y_noise_sd = options.y_noise_sd;
  model.validate();
  return model;
}

PopulationMoments population_moments(const GaussianThreeViewModel& model) {
  model.validate();
  const Index k = model.k;
  PopulationMoments m;
  m.k = k;
  m.sigma_xx.resize(3 * k, 3 * k);
  m.sigma_xh.resize(3 * k, k);
  m.sigma_xy.resize(3 * k);
  for (Index i = 0; i < 3; ++i) {
    const Matrix& ai = model.loadings[static_cast<std::size_t>(i)];
    for (Index j = 0; j < 3; ++j) {
      const Matrix& aj = model.loadings[static_cast<std::size_t>(j)];
      m.sigma_xx.block(i * k, j * k, k, k) = ai * aj.transpose();
    }
    const double sd = model.view_noise_sd[static_cast<std::size_t>(i)];
    m.sigma_xx.block(i * k, i * k, k, k).diagonal().array() += sd * sd;
    m.sigma_xh.block(i * k, 0, k, k) = ai;
    m.sigma_xy.segment(i * k, k) = ai * model.beta;
  }
  m.var_y = model.beta.squaredNorm() + model.y_noise_sd * model.y_noise_sd;
  return m;
}

Dataset sample(const GaussianThreeViewModel& model, Index n, std::uint64_t seed) {
  model.validate();
  const kernels::RowModel rows{model.loadings, model.view_noise_sd, model.beta, model.y_noise_sd};
  auto buffers = kernels::sample_rows(rows, n, seed);
  return {std::move(buffers.views), std::move(buffers.hidden), std::move(buffers.labels), seed};
}

double optimal_loss_for_map(const PopulationMoments& moments, const Matrix& feature_map) {
  if (feature_map.rows() != moments.sigma_xx.rows()) {
    fail(ErrorKind::invalid_input, "feature map rows must equal the feature dimension");
  }
  if (feature_map.cols() == 0) return moments.var_y;
  const Matrix g = feature_map.transpose() * moments.sigma_xx * feature_map;
  check_subspace_conditioning(g, "restricted covariance");
  const Vector c = feature_map.transpose() * moments.sigma_xy;
  return moments.var_y - c.dot(g.ldlt().solve(c));
}

double optimal_loss(const PopulationMoments& moments,
                    const std::optional<OrthonormalBasis>& subspace) {
  if (!subspace) return optimal_loss_for_map(moments, Matrix::Identity(moments.sigma_xx.rows(), moments.sigma_xx.rows()));
  if (subspace->ambient_dim() != moments.sigma_xx.rows()) {
    fail(ErrorKind::invalid_input, "subspace ambient dimension must equal 3k");
  }
  return optimal_loss_for_map(moments, subspace->matrix());
}

OrthonormalBasis oracle_subspace(const PopulationMoments& moments) {
  check_subspace_conditioning(moments.sigma_xx, "sigma_xx");
  const Matrix direction = moments.sigma_xx.ldlt().solve(moments.sigma_xh);
  OrthonormalBasis basis = orthonormal_basis(direction);
  if (basis.size() != moments.k) {
    fail(ErrorKind::ill_conditioned, "oracle subspace lost rank");
  }
  return basis;
}

}  // namespace mvcca
