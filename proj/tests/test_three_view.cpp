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

#include <doctest.h>

#include <cmath>

#include "mvcca/error.hpp"
#include "mvcca/kernels.hpp"
#include "mvcca/model.hpp"
#include "mvcca/three_view.hpp"
#include "oracles.hpp"

using namespace mvcca;

namespace {

Matrix one(double v) { return Matrix::Constant(1, 1, v); }

ThreeViewProjection fit_exact(const PopulationMoments& p) { return fit(PsdMatrix(p.sigma_xx), p.k); }

double angle_between(const Matrix& a, const Matrix& b) {
  return max_principal_angle(orthonormal_basis(a), orthonormal_basis(b));
}

}  // namespace

TEST_CASE("k = 1, identical views weight equally") {
  const auto m = oracle::fixed_model(one(1), one(1), one(1), Vector::Ones(1), {1.0, 1.0, 1.0}, 0.5);
  const auto proj = fit_exact(population_moments(m));
  CHECK(proj.u1.cols() == 1);
  CHECK(angle_between(proj.u1, Matrix::Ones(3, 1)) < 1e-8);
}

TEST_CASE("k = 1 recovers inverse-variance weights") {
  const auto m = oracle::fixed_model(one(1), one(1), one(1), Vector::Ones(1), {2.0, 0.5, 0.2}, 0.5);
  const auto proj = fit_exact(population_moments(m));
  Vector var(3);
  var << 4.0, 0.25, 0.04;
  CHECK(angle_between(proj.u1, oracle::inverse_variance_weights(var)) < 1e-8);
}

TEST_CASE("exact moments recover the oracle subspace") {
  for (Index k : {1, 2, 3, 5, 10}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      CAPTURE(k);
      CAPTURE(seed);
      const auto p = population_moments(random_model(k, seed * 31 + static_cast<std::uint64_t>(k)));
      const auto proj = fit_exact(p);
      const auto diag = validate(proj, p);
      REQUIRE(diag.principal_angles_to_oracle.has_value());
      CHECK(diag.principal_angles_to_oracle->size() == static_cast<std::size_t>(k));
      CHECK(diag.principal_angles_to_oracle->back() < 1e-7);
      CHECK(diag.discarded_hidden_covariance_max < 1e-8);
      CHECK(diag.r_rank_margin > 1e-8);
      CHECK(proj.warnings.empty());
    }
  }
}

TEST_CASE("structural invariants") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index k = 1 + static_cast<Index>(seed % 4);
    const auto p = population_moments(random_model(k, seed));
    const auto proj = fit_exact(p);
    const Matrix& q = proj.q.matrix();

    CHECK(proj.u1.rows() == 3 * k);
    CHECK(proj.u1.cols() == k);
    CHECK(proj.r_embedded.cols() == 2 * k);
    CHECK(proj.p1.size() == k);
    CHECK(proj.p2.size() == 2 * k);
    CHECK((proj.p1.matrix().transpose() * proj.p2.matrix()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((q * proj.u1 - proj.p1.matrix()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((q * q - p.sigma_xx).cwiseAbs().maxCoeff() < 1e-8 * p.sigma_xx.norm());
    CHECK(max_principal_angle(orthonormal_basis(q * proj.r_embedded), proj.p2) < 1e-8);

    // u1 features are white: u1^T sigma u1 = I
    CHECK((proj.u1.transpose() * p.sigma_xx * proj.u1 - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <
          1e-8);

    // discarded directions carry nothing about the hidden state or the label
    CHECK((proj.r_embedded.transpose() * p.sigma_xh).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((proj.r_embedded.transpose() * p.sigma_xy).cwiseAbs().maxCoeff() < 1e-8);

    // u1 is lossless
    CHECK(std::abs(optimal_loss_for_map(p, proj.u1) - optimal_loss(p)) < 1e-8);
  }
}

TEST_CASE("the transposed block layout is not a valid discard set") {
  const Index k = 3;
  const auto p = population_moments(random_model(k, 12));
  const auto proj = fit_exact(p);
  const Matrix r1 = proj.r_embedded.block(k, 0, 2 * k, k);
  const Matrix r2 = proj.r_embedded.block(0, k, 2 * k, k);
  Matrix wrong = Matrix::Zero(3 * k, 2 * k);
  wrong.block(0, 0, 2 * k, k) = r1;
  wrong.block(k, k, 2 * k, k) = r2;
  CHECK((wrong.transpose() * p.sigma_xh).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("equivariant under an invertible change of coordinates in one view") {
  const Index k = 3;
  const auto p = population_moments(random_model(k, 44));
  const Matrix t = oracle::random_matrix(k, k, 5) + 3.0 * Matrix::Identity(k, k);
  Matrix b = Matrix::Identity(3 * k, 3 * k);
  b.block(k, k, k, k) = t;
  Matrix s2 = b * p.sigma_xx * b.transpose();
  s2 = (0.5 * (s2 + s2.transpose())).eval();
  const auto proj = fit_exact(p);
  const auto proj2 = fit(PsdMatrix(s2), k);
  // features x^T u1 are preserved when u1' spans B^{-T} u1
  const Matrix mapped = b.transpose().fullPivLu().solve(proj.u1);
  CHECK(angle_between(proj2.u1, mapped) < 1e-7);
}

TEST_CASE("fit input validation") {
  CHECK_THROWS_AS(fit(PsdMatrix(Matrix::Identity(4, 4)), 1), Error);
  CHECK_THROWS_AS(fit(PsdMatrix(Matrix::Identity(3, 3)), 0), Error);
  CHECK_THROWS_AS(fit_samples(Matrix::Ones(10, 4), 1), Error);
}

TEST_CASE("fit_samples and transform") {
  const Index k = 2;
  const auto m = random_model(k, 8);
  const auto d = sample(m, 100000, 1);
  const auto sf = fit_samples(d.views, k);
  CHECK(sf.projection.fit_sample_count == 100000);
  CHECK(sf.moments.sample_count == 100000);

  const Matrix z = transform(sf.projection, d.views, sf.moments.mean);
  CHECK(z.rows() == 100000);
  CHECK(z.cols() == k);
  const auto zm = kernels::mean_and_covariance(z);
  CHECK(zm.mean.cwiseAbs().maxCoeff() < 1e-10);
  CHECK((zm.covariance - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-6);

  const Matrix center_row = sf.moments.mean.transpose();
  CHECK(transform(sf.projection, center_row, sf.moments.mean).cwiseAbs().maxCoeff() == 0.0);
  const Matrix single = d.views.topRows(1);
  CHECK((transform(sf.projection, single, sf.moments.mean) - z.topRows(1)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK_THROWS_AS(transform(sf.projection, Matrix::Ones(2, 5), sf.moments.mean), Error);

  const auto p = population_moments(m);
  const auto diag = validate(sf.projection, p);
  CHECK(diag.principal_angles_to_oracle->back() < 0.05);
}

TEST_CASE("estimated subspace improves with sample size") {
  const Index k = 10;
  const auto m = random_model(k, 2);
  const auto p = population_moments(m);
  const auto small = validate(fit_samples(sample(m, 500, 3).views, k).projection, p);
  const auto large = validate(fit_samples(sample(m, 50000, 3).views, k).projection, p);
  CHECK(small.principal_angles_to_oracle->back() > large.principal_angles_to_oracle->back());
  CHECK(small.discarded_hidden_covariance_max > large.discarded_hidden_covariance_max);
  for (double a : *small.principal_angles_to_oracle) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.5707963267948966 + 1e-12);
  }
}

TEST_CASE("average_views") {
  Matrix x(1, 3);
  x << 1, 2, 3;
  CHECK(average_views(x)(0, 0) == 6.0);
  Matrix y(2, 6);
  y << 1, 2, 3, 4, 5, 6, 0, 0, 1, 1, 2, 2;
  Matrix expect(2, 2);
  expect << 9, 12, 3, 3;
  CHECK(average_views(y) == expect);
  CHECK((y * averaging_map(2) - expect).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(average_views(Matrix::Ones(2, 4)), Error);
}

TEST_CASE("averaging loses to optimal weighting under unequal noise") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Index k = 1 + static_cast<Index>(seed % 5);
    const auto p = population_moments(random_model(k, seed));
    const auto proj = fit_exact(p);
    CHECK(optimal_loss_for_map(p, averaging_map(k)) > optimal_loss_for_map(p, proj.u1));
  }
}

TEST_CASE("degenerate models") {
  SUBCASE("a view with zero loading") {
    // the model type rejects this loading, so build the covariance directly
    Vector a(3);
    a << 1.0, 0.0, 1.0;
    const Matrix s = a * a.transpose() + Matrix::Identity(3, 3);
    try {
      fit(PsdMatrix(s), 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::degenerate_model);
    }
  }
  SUBCASE("nearly noiseless third view still recovers the oracle") {
    const auto m =
        oracle::fixed_model(one(1), one(1), one(1), Vector::Ones(1), {1.0, 1.0, 1e-6}, 1.0);
    const auto p = population_moments(m);
    const auto proj = fit_exact(p);
    Vector var(3);
    var << 1.0, 1.0, 1e-12;
    CHECK(angle_between(proj.u1, oracle::inverse_variance_weights(var)) < 1e-6);
  }
}

TEST_CASE("flat record layout") {
  const auto proj = fit_exact(population_moments(random_model(2, 1)));
  const auto flat = to_flat_record(proj);
  CHECK(flat.size() == 1 + 6 * 2 + 36 + 6 * 4 + 2);
  CHECK(flat.front() == 2.0);
  CHECK(flat[1] == proj.u1(0, 0));
  CHECK(flat[2] == proj.u1(0, 1));
  CHECK(flat[flat.size() - 2] == proj.r_smallest_singular_value);
  CHECK(flat.back() == 0.0);
}
