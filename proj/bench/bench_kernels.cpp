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

#include <array>

#include <benchmark/benchmark.h>

#include "mvcca/kernels.hpp"
#include "mvcca/model.hpp"

namespace {

using mvcca::Index;
using mvcca::Matrix;
namespace kernels = mvcca::kernels;

struct Setup {
  mvcca::GaussianThreeViewModel model = mvcca::random_model(10, 1);
  kernels::RowModel rows;

  Setup() {
    rows.loadings = model.loadings;
    rows.view_noise_sd = model.view_noise_sd;
    rows.beta = model.beta;
    rows.y_noise_sd = model.y_noise_sd;
  }
};

const Setup& setup() {
  static const Setup s;
  return s;
}

template <auto Fn>
void BM_sample_rows(benchmark::State& state) {
  const auto n = static_cast<Index>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Fn(setup().rows, n, 7));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_covariance(benchmark::State& state) {
  const Matrix x = kernels::sample_rows(setup().rows, state.range(0), 3).views;
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void BM_project_rows(benchmark::State& state) {
  const Matrix x = kernels::sample_rows(setup().rows, state.range(0), 3).views;
  const Matrix map = Matrix::Random(x.cols(), 10);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(x, map));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_sample_rows<kernels::sample_rows>)->Name("sample_rows/parallel")->Arg(10000)->Arg(100000);
BENCHMARK(BM_sample_rows<kernels::serial::sample_rows>)->Name("sample_rows/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_covariance<kernels::mean_and_covariance>)->Name("covariance/parallel")->Arg(10000)->Arg(100000);
BENCHMARK(BM_covariance<kernels::serial::mean_and_covariance>)->Name("covariance/serial")->Arg(10000)->Arg(100000);
BENCHMARK(BM_project_rows<kernels::project_rows>)->Name("project_rows/parallel")->Arg(10000)->Arg(100000);
BENCHMARK(BM_project_rows<kernels::serial::project_rows>)->Name("project_rows/serial")->Arg(10000)->Arg(100000);

BENCHMARK_MAIN();
