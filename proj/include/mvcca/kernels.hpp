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

// Data-parallel inner loops. Each parallel kernel has a serial reference in
// mvcca::kernels::serial that the tests compare against; the OpenMP versions
// split work into fixed-size chunks and combine partials in chunk order, so
// their output does not depend on the thread count.

#include <cstdint>
#include <span>

#include "mvcca/linalg.hpp"

namespace mvcca::kernels {

inline constexpr Index kChunkRows = 2048;

/// Loadings and noise scales for the row generator.
struct RowModel {
  std::span<const Matrix> loadings;     // view i: d_i x k
  std::span<const double> view_noise_sd;
  Vector beta;                          // length k
  double y_noise_sd = 0.0;
};

struct SampleBuffers {
  Matrix views;   // n x sum(d_i)
  Matrix hidden;  // n x k
  Vector labels;  // n
};

/// Row r of chunk c is drawn from an engine seeded by (seed, c): hidden
/// state, then each view's noise in view order, then the label noise.
SampleBuffers sample_rows(const RowModel& model, Index n, std::uint64_t seed);

struct Moments {
  Vector mean;
  Matrix covariance;  // 1/(n-1) normalization, symmetrized
};

/// Column means and centered covariance of the rows of data.
Moments mean_and_covariance(const Matrix& data);

/// Row-block mat-mul: out = data * map.
Matrix project_rows(const Matrix& data, const Matrix& map);

namespace serial {

SampleBuffers sample_rows(const RowModel& model, Index n, std::uint64_t seed);

/// Two-pass scalar loops; independent of the Eigen products used above.
Moments mean_and_covariance(const Matrix& data);

Matrix project_rows(const Matrix& data, const Matrix& map);

}  // namespace serial

/// Threads OpenMP would use for a parallel region (1 without OpenMP).
int max_threads() noexcept;

}  // namespace mvcca::kernels
