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

#include <array>
#include <cstdint>
#include <optional>

#include "mvcca/linalg.hpp"

namespace mvcca {

enum class LoadingKind {
  orthogonal,  // Haar-random rotations
  gaussian,    // i.i.d. N(0, 1) entries, regenerated until full rank
};

struct ModelOptions {
  std::array<double, 3> view_noise_sd{2.0, 0.5, 0.2};
  double y_noise_sd = 0.5;
  LoadingKind loading = LoadingKind::orthogonal;
};

/// Three k-dimensional views loaded linearly on a k-dimensional standard
/// normal hidden state: view i = A_i h + sd_i * noise, y = beta h + sd_y * noise.
/// Noise scales are standard deviations.
struct GaussianThreeViewModel {
  Index k = 0;
  std::array<Matrix, 3> loadings;
  Vector beta;  // length k
  std::array<double, 3> view_noise_sd{};
  double y_noise_sd = 0.0;

  /// Throws invalid_input unless every A_i is k x k with smallest singular
  /// value > 1e-8 and every noise scale is positive.
  void validate() const;
};

/// Exact second moments implied by a model (hidden covariance = I).
struct PopulationMoments {
  Index k = 0;
  Matrix sigma_xx;  // 3k x 3k
  Matrix sigma_xh;  // 3k x k
  Vector sigma_xy;  // 3k
  double var_y = 0.0;
};

struct Dataset {
  Matrix views;   // n x 3k, X^1 then X^2 then X^3
  Matrix hidden;  // n x k
  Vector labels;  // n
  std::uint64_t seed = 0;
};

GaussianThreeViewModel random_model(Index k, std::uint64_t seed,
                                    const ModelOptions& options = {});

PopulationMoments population_moments(const GaussianThreeViewModel& model);

Dataset sample(const GaussianThreeViewModel& model, Index n, std::uint64_t seed);

/// Square loss of the best linear predictor of y from W^T x:
///   var_y - sigma_xy^T W (W^T sigma_xx W)^{-1} W^T sigma_xy,
/// with W the identity when no subspace is given.
double optimal_loss(const PopulationMoments& moments,
                    const std::optional<OrthonormalBasis>& subspace = std::nullopt);

/// Same quantity for an arbitrary (not necessarily orthonormal) feature map.
double optimal_loss_for_map(const PopulationMoments& moments, const Matrix& feature_map);

/// Column space of sigma_xx^{-1} sigma_xh: the span of the best linear
/// estimate of the hidden state, k columns.
OrthonormalBasis oracle_subspace(const PopulationMoments& moments);

}  // namespace mvcca
