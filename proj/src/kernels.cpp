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

#include "mvcca/kernels.hpp"

#include <algorithm>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mvcca/error.hpp"
#include "mvcca/rng.hpp"

namespace mvcca::kernels {

namespace {

Index total_view_dim(const RowModel& model) {
  Index d = 0;
  for (const auto& a : model.loadings) d += a.rows();
  return d;
}

void check_model(const RowModel& model) {
  if (model.loadings.size() != model.view_noise_sd.size()) {
    fail(ErrorKind::invalid_input, "one noise scale is needed per view");
  }
  for (const auto& a : model.loadings) {
    if (a.cols() != model.beta.size()) {
      fail(ErrorKind::invalid_input, "loading column count must equal the hidden dimension");
    }
  }
}

Index chunk_count(Index n) { return (n + kChunkRows - 1) / kChunkRows; }

// Fills rows [begin, end) using one engine for the whole chunk.
void fill_chunk(const RowModel& model, Index chunk, Index begin, Index end,
                std::uint64_t seed, SampleBuffers& out) {
  Engine eng = make_engine(derive_seed(seed, "rows", {static_cast<std::uint64_t>(chunk)}));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index k = model.beta.size();
  Vector h(k);
  for (Index r = begin; r < end; ++r) {
    for (Index j = 0; j < k; ++j) h(j) = normal(eng);
    out.hidden.row(r) = h.transpose();
    Index col = 0;
    for (std::size_t v = 0; v < model.loadings.size(); ++v) {
      const Matrix& a = model.loadings[v];
      const double sd = model.view_noise_sd[v];
      for (Index i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (Index j = 0; j < k; ++j) acc += a(i, j) * h(j);
        out.views(r, col + i) = acc + sd * normal(eng);
      }
      col += a.rows();
    }
    double y = 0.0;
    for (Index j = 0; j < k; ++j) y += model.beta(j) * h(j);
    out.labels(r) = y + model.y_noise_sd * normal(eng);
  }
}

SampleBuffers allocate(const RowModel& model, Index n) {
  if (n < 1) fail(ErrorKind::invalid_input, "sample size must be positive");
  check_model(model);
  SampleBuffers out;
  out.views.resize(n, total_view_dim(model));
  out.hidden.resize(n, model.beta.size());
  out.labels.resize(n);
  return out;
}

void check_covariance_input(const Matrix& data) {
  if (data.rows() < 2) {
    fail(ErrorKind::insufficient_data, "covariance needs at least two rows");
  }
}

}  // namespace

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

SampleBuffers sample_rows(const RowModel& model, Index n, std::uint64_t seed) {
  SampleBuffers out = allocate(model, n);
  const Index chunks = chunk_count(n);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kChunkRows;
    const Index end = std::min(n, begin + kChunkRows);
    fill_chunk(model, c, begin, end, seed, out);
  }
  return out;
}

Moments mean_and_covariance(const Matrix& data) {
  check_covariance_input(data);
  const Index n = data.rows();
  const Index d = data.cols();
  const Index chunks = chunk_count(n);

  std::vector<Vector> sums(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kChunkRows;
    const Index len = std::min(n, begin + kChunkRows) - begin;
    sums[static_cast<std::size_t>(c)] = data.middleRows(begin, len).colwise().sum().transpose();
  }
  Vector mean = Vector::Zero(d);
  for (const auto& s : sums) mean += s;
  mean /= static_cast<double>(n);

  std::vector<Matrix> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kChunkRows;
    const Index len = std::min(n, begin + kChunkRows) - begin;
    const Matrix centered = data.middleRows(begin, len).rowwise() - mean.transpose();
    partial[static_cast<std::size_t>(c)] = centered.transpose() * centered;
  }
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& p : partial) cov += p;
  cov /= static_cast<double>(n - 1);
  cov = (0.5 * (cov + cov.transpose())).eval();
  return {std::move(mean), std::move(cov)};
}

Matrix project_rows(const Matrix& data, const Matrix& map) {
  if (data.cols() != map.rows()) {
    fail(ErrorKind::invalid_input, "projection map rows must match the data columns");
  }
  const Index n = data.rows();
  Matrix out(n, map.cols());
  const Index chunks = chunk_count(n);
#pragma omp parallel for schedule(static)
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kChunkRows;
    const Index len = std::min(n, begin + kChunkRows) - begin;
    out.middleRows(begin, len).noalias() = data.middleRows(begin, len) * map;
  }
  return out;
}

namespace serial {

SampleBuffers sample_rows(const RowModel& model, Index n, std::uint64_t seed) {
  SampleBuffers out = allocate(model, n);
  const Index chunks = chunk_count(n);
  for (Index c = 0; c < chunks; ++c) {
    const Index begin = c * kChunkRows;
    fill_chunk(model, c, begin, std::min(n, begin + kChunkRows), seed, out);
  }
  return out;
}

Moments mean_and_covariance(const Matrix& data) {
  check_covariance_input(data);
  const Index n = data.rows();
  const Index d = data.cols();
  Vector mean = Vector::Zero(d);
  for (Index r = 0; r < n; ++r)
    for (Index j = 0; j < d; ++j) mean(j) += data(r, j);
  mean /= static_cast<double>(n);

  Matrix cov = Matrix::Zero(d, d);
  for (Index r = 0; r < n; ++r) {
    for (Index i = 0; i < d; ++i) {
      const double ci = data(r, i) - mean(i);
      for (Index j = i; j < d; ++j) cov(i, j) += ci * (data(r, j) - mean(j));
    }
  }
  for (Index i = 0; i < d; ++i) {
    for (Index j = i; j < d; ++j) {
      cov(i, j) /= static_cast<double>(n - 1);
      cov(j, i) = cov(i, j);
    }
  }
  return {std::move(mean), std::move(cov)};
}

Matrix project_rows(const Matrix& data, const Matrix& map) {
  if (data.cols() != map.rows()) {
    fail(ErrorKind::invalid_input, "projection map rows must match the data columns");
  }
  Matrix out = Matrix::Zero(data.rows(), map.cols());
  for (Index r = 0; r < data.rows(); ++r)
    for (Index j = 0; j < map.cols(); ++j) {
      double acc = 0.0;
      for (Index i = 0; i < map.rows(); ++i) acc += data(r, i) * map(i, j);
      out(r, j) = acc;
    }
  return out;
}

}  // namespace serial

}  // namespace mvcca::kernels
