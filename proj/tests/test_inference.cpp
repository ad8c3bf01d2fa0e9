#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "precis/inference.hpp"
#include "precis/models.hpp"
#include "precis/nodewise.hpp"
#include "precis/stats.hpp"

namespace {

#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))

using precis::CovarianceEstimate;
using precis::DebiasedEstimate;
using precis::Matrix;
using precis::PrecisionEstimate;
using precis::Vector;

PrecisionEstimate wrap(const Matrix& theta) {
  PrecisionEstimate est;
  est.theta = theta;
  est.provenance = precis::Provenance::population;
  return est;
}

Matrix slow_inverse(const Matrix& m) {
  const int p = static_cast<int>(m.rows());
  Matrix inv(p, p);
  for (int c = 0; c < p; ++c) {
    Vector e = Vector::Zero(p);
    e(c) = 1.0;
    inv.col(c) = oracles::gauss_solve(m, e);
  }
  return inv;
}

DebiasedEstimate nodewise_debiased(const precis::DataMatrix& data, double lambda) {
  const auto cov = precis::sample_covariance(data);
  auto est = precis::fit_nodewise(data, lambda, precis::NodewiseRegressor::sqrt_lasso,
                                  precis::TauVariant::tau_hat, cov);
  return precis::debias_with_variance(est.as_precision(), cov);
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("correction vanishes at the exact inverse") {
  oracles::TestRng rng(5);
  const Matrix sigma = oracles::random_spd(5, rng);
  const Matrix theta = slow_inverse(sigma);
  auto deb = precis::debias(wrap(theta), precis::covariance_from_population(sigma));
  CHECK((deb.t_hat - theta).cwiseAbs().maxCoeff() <= 1e-10);

  auto zero = precis::debias(wrap(Matrix::Zero(5, 5)),
                             precis::covariance_from_population(sigma));
  CHECK(zero.t_hat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matches longhand arithmetic on an asymmetric input") {
  oracles::TestRng rng(13);
  const Matrix sigma = oracles::random_spd(3, rng);
  Matrix theta(3, 3);
  theta << 1.2, 0.3, -0.1, 0.1, 0.9, 0.2, -0.3, 0.0, 1.5;

  auto deb = precis::debias(wrap(theta), precis::covariance_from_population(sigma));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double quad = 0.0;
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) quad += theta(k, i) * sigma(k, l) * theta(l, j);
      }
      CHECK_NEAR(deb.t_hat(i, j), theta(i, j) + theta(j, i) - quad, 1e-12);
    }
  }
  CHECK((deb.t_hat - deb.t_hat.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("variance formula from the symmetrized estimate") {
  auto eye = precis::variance_estimates(wrap(Matrix::Identity(3, 3)));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK_NEAR(eye(i, j), i == j ? std::sqrt(2.0) : 1.0, 1e-15);
    }
  }

  Matrix two(2, 2);
  two << 2.0, 1.0, 1.0, 2.0;
  auto s = precis::variance_estimates(wrap(two));
  CHECK_NEAR(s(0, 1), std::sqrt(5.0), 1e-15);
  CHECK_NEAR(s(0, 0), std::sqrt(8.0), 1e-15);

  // asymmetric input is symmetrized first: the off entry becomes 0.2
  Matrix lop(2, 2);
  lop << 1.0, 0.4, 0.0, 1.0;
  auto ls = precis::variance_estimates(wrap(lop));
  CHECK_NEAR(ls(0, 1), std::sqrt(1.0 + 0.04), 1e-15);

  Matrix bad = Matrix::Identity(2, 2);
  bad(1, 1) = 0.0;
  CHECK_THROWS_AS(precis::variance_estimates(wrap(bad)), precis::NonPositiveDiagonal);
}

TEST_CASE("confidence intervals use the normal quantile") {
  DebiasedEstimate deb;
  deb.t_hat = Matrix::Zero(2, 2);
  deb.sigma_hat = Matrix::Ones(2, 2);
  deb.n = 100;

  auto grid = precis::confidence_intervals(deb, 0.05);
  CHECK_NEAR(grid.z, 1.959963984540054, 1e-12);
  CHECK_NEAR(grid.upper(0, 1), 0.1959963984540054, 1e-13);
  CHECK_NEAR(grid.lower(0, 1), -0.1959963984540054, 1e-13);

  auto wide = precis::confidence_intervals(deb, 0.32);
  CHECK_NEAR(wide.z, 0.9944578832097532, 1e-12);

  // width identity 2 z sigma / sqrt(n), entry by entry
  deb.t_hat(0, 1) = 0.7;
  deb.t_hat(1, 0) = 0.7;
  deb.sigma_hat(0, 1) = 2.5;
  deb.sigma_hat(1, 0) = 2.5;
  auto shifted = precis::confidence_intervals(deb, 0.05);
  CHECK_NEAR(shifted.upper(0, 1) - shifted.lower(0, 1),
             2.0 * shifted.z * 2.5 / 10.0, 1e-14);
  CHECK_NEAR(0.5 * (shifted.upper(0, 1) + shifted.lower(0, 1)), 0.7, 1e-15);

  CHECK_THROWS_AS(precis::confidence_intervals(deb, 0.0), precis::InvalidAlpha);
  CHECK_THROWS_AS(precis::confidence_intervals(deb, 1.0), precis::InvalidAlpha);
  CHECK_THROWS_AS(precis::confidence_intervals(deb, -0.2), precis::InvalidAlpha);

  DebiasedEstimate bare;
  bare.t_hat = Matrix::Zero(2, 2);
  bare.n = 100;
  CHECK_THROWS_AS(precis::confidence_intervals(bare, 0.05), precis::DimensionMismatch);
}

TEST_CASE("edge recovery keeps entries whose interval excludes zero") {
  DebiasedEstimate deb;
  deb.t_hat = Matrix::Identity(3, 3);
  deb.sigma_hat = Matrix::Ones(3, 3);
  deb.n = 100;
  deb.t_hat(0, 1) = deb.t_hat(1, 0) = 0.9;   // |t| >> z/sqrt(n) = 0.196
  deb.t_hat(1, 2) = deb.t_hat(2, 1) = 0.1;   // inside the interval

  auto strong = precis::edge_recovery(deb, 0.05, precis::RecoveryRule::per_entry);
  CHECK(strong.has_edge(0, 1));
  CHECK(strong.has_edge(1, 0));
  CHECK(!strong.has_edge(1, 2));
  CHECK(!strong.has_edge(0, 2));
  CHECK(strong.edge_count == 2);  // both orientations of the one pair

  auto conservative = precis::edge_recovery(deb, 0.05, precis::RecoveryRule::bonferroni);
  CHECK(conservative.has_edge(0, 1));
  CHECK(!conservative.has_edge(1, 2));
  for (const auto& e : conservative.edges) CHECK(strong.has_edge(e.first, e.second));

  deb.t_hat = Matrix::Identity(3, 3);  // nothing off the diagonal
  auto empty = precis::edge_recovery(deb, 0.05, precis::RecoveryRule::per_entry);
  CHECK(empty.edge_count == 0);
}

TEST_CASE("recovered pattern is invariant to measurement scale") {
  auto theta0 = precis::make_model(precis::Model::model1, 6);
  const auto data = precis::sample_gaussian(theta0, 400, 9);
  const double lambda = std::sqrt(std::log(6.0) / 400.0);

  auto base = precis::edge_recovery(nodewise_debiased(data, lambda), 0.05,
                                    precis::RecoveryRule::per_entry);
  const precis::DataMatrix scaled(3.7 * data.values());
  auto rescaled = precis::edge_recovery(nodewise_debiased(scaled, lambda), 0.05,
                                        precis::RecoveryRule::per_entry);
  CHECK(base.edges == rescaled.edges);
  CHECK(base.edge_count > 0);
}

TEST_CASE("interval coverage outside the support is near nominal") {
  // single five-diagonal block, long samples: the intervals for true zeros
  // should cover at close to the nominal 95 percent
  const Matrix theta0 = oracles::banded_block(10, 1.0, 0.5, 0.4);
  PrecisionEstimate pop = wrap(theta0);
  const double lambda = std::sqrt(std::log(10.0) / 1000.0);

  int covered = 0;
  int total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto data = precis::sample_gaussian(pop, 1000, 1000 + rep);
    auto grid = precis::confidence_intervals(nodewise_debiased(data, lambda), 0.05);
    for (int i = 0; i < 10; ++i) {
      for (int j = i + 1; j < 10; ++j) {
        if (theta0(i, j) != 0.0) continue;
        ++total;
        if (grid.lower(i, j) <= 0.0 && 0.0 <= grid.upper(i, j)) ++covered;
      }
    }
  }
  const double rate = static_cast<double>(covered) / total;
  CHECK(rate >= 0.90);
  CHECK(rate <= 0.99);
}

TEST_CASE("bonferroni recovery rarely admits false edges") {
  auto theta0 = precis::make_model(precis::Model::model1, 20);
  const double lambda = std::sqrt(std::log(20.0) / 2000.0);

  int clean = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto data = precis::sample_gaussian(theta0, 2000, 7000 + rep);
    auto rec = precis::edge_recovery(nodewise_debiased(data, lambda), 0.05,
                                     precis::RecoveryRule::bonferroni);
    bool any_false = false;
    for (const auto& e : rec.edges) {
      if (theta0.theta(e.first, e.second) == 0.0) any_false = true;
    }
    if (!any_false) ++clean;
  }
  CHECK(clean >= 95);
}

TEST_CASE("irrepresentability margin matches the brute force Hessian") {
  // identity: the off-support rows of the Hessian vanish, margin is exactly one
  auto eye = precis::irrepresentability_check(wrap(Matrix::Identity(4, 4)),
                                              precis::SparsityPattern{});
  CHECK_NEAR(eye.alpha_margin, 1.0, 1e-12);
  CHECK_NEAR(eye.kappa_H, 1.0, 1e-12);
  CHECK_NEAR(eye.kappa_Sigma, 1.0, 1e-12);
  CHECK(eye.satisfied);

  // tridiagonal chain with moderate coupling
  Matrix chain = Matrix::Identity(4, 4);
  for (int i = 0; i + 1 < 4; ++i) {
    chain(i, i + 1) = 0.35;
    chain(i + 1, i) = 0.35;
  }
  auto pattern = precis::pattern_from_matrix(chain, 1e-12);
  auto diag = precis::irrepresentability_check(wrap(chain), pattern);

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (chain(i, j) != 0.0) edges.push_back({i, j});
    }
  }
  auto ref = oracles::irrepresentability_brute_force(slow_inverse(chain), edges);
  CHECK_NEAR(diag.alpha_margin, ref.alpha_margin, 1e-8);
  CHECK_NEAR(diag.kappa_H, ref.kappa_h, 1e-8);
  CHECK_NEAR(diag.kappa_Sigma, ref.kappa_sigma, 1e-8);
  CHECK(diag.satisfied == (ref.alpha_margin > 0.0));

  Matrix flat = Matrix::Identity(3, 3);
  flat(0, 0) = 0.0;
  CHECK_THROWS_AS(
      precis::irrepresentability_check(wrap(flat), precis::SparsityPattern{}),
      precis::NotPositiveDefinite);
}

}  // TEST_SUITE
