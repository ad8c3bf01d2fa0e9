#include "precis/nodewise.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "precis/lasso.hpp"
#include "precis/parallel.hpp"

namespace precis {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void slice_gram(const Matrix& sigma, int j, Matrix& g11, Vector& g12) {
  const int p = static_cast<int>(sigma.rows());
  int r = 0;
  for (int i = 0; i < p; ++i) {
    if (i == j) continue;
    int c = 0;
    for (int k = 0; k < p; ++k) {
      if (k == j) continue;
      g11(r, c) = sigma(i, k);
      ++c;
    }
    g12(r) = sigma(i, j);
    ++r;
  }
}

}  // namespace

NodewiseColumnFit fit_node_column(const DataMatrix& data, int j, double lambda,
                                  NodewiseRegressor regressor,
                                  const CovarianceEstimate& cov) {
  const int p = data.p();
  const int n = data.n();
  if (j < 0 || j >= p) throw DimensionMismatch("fit_node_column: node index out of range");
  if (cov.p() != p) throw DimensionMismatch("fit_node_column: covariance size mismatch");
  if (!(lambda >= 0.0)) throw ValidationError("fit_node_column: lambda must be nonnegative");
  if (lambda == 0.0 && p - 1 >= n) {
    throw ValidationError("fit_node_column: lambda > 0 required when p - 1 >= n");
  }

  const int q = p - 1;
  Matrix g11(q, q);
  Vector g12(q);
  slice_gram(cov.sigma_hat, j, g11, g12);
  const double y_sq_n = cov.sigma_hat(j, j);

  NodewiseColumnFit fit;
  fit.node = j;
  fit.lambda = lambda;
  fit.gamma = Vector::Zero(q);
  Vector gb = Vector::Zero(q);

  bool converged = true;
  if (regressor == NodewiseRegressor::sqrt_lasso) {
    double tau = std::sqrt(y_sq_n);
    if (tau < 1e-10) throw DegenerateResidual("fit_node_column: zero-scale column");
    bool outer_ok = false;
    for (int it = 0; it < 200; ++it) {
      const Vector penalty = Vector::Constant(q, lambda * tau);
      auto status = detail::gram_lasso(g11, g12, penalty, fit.gamma, gb, 1e-9, 10000);
      converged = status.converged;
      const double rss_n =
          std::max(y_sq_n - 2.0 * g12.dot(fit.gamma) + fit.gamma.dot(gb), 0.0);
      const double tau_new = std::sqrt(rss_n);
      if (tau_new < 1e-10) {
        throw DegenerateResidual("fit_node_column: residual collapsed");
      }
      const bool stable = std::abs(tau_new - tau) <= 1e-8 * std::max(1.0, tau);
      tau = tau_new;
      if (stable) {
        outer_ok = true;
        break;
      }
    }
    converged = converged && outer_ok;
  } else {
    const Vector penalty = Vector::Constant(q, lambda);
    auto status = detail::gram_lasso(g11, g12, penalty, fit.gamma, gb, 1e-9, 10000);
    converged = status.converged;
  }
  fit.converged = converged;

  // exact residual against the raw data
  Vector r = data.values().col(j);
  {
    int idx = 0;
    for (int k = 0; k < p; ++k) {
      if (k == j) continue;
      if (fit.gamma(idx) != 0.0) r.noalias() -= fit.gamma(idx) * data.values().col(k);
      ++idx;
    }
  }
  fit.tau_hat = r.norm() / std::sqrt(static_cast<double>(n));
  if (fit.tau_hat < 1e-10) {
    throw DegenerateResidual("fit_node_column: residual collapsed");
  }

  const Vector full_corr = (data.values().transpose() * r) / static_cast<double>(n);
  fit.subgradient.resize(q);
  {
    const double scale = (regressor == NodewiseRegressor::sqrt_lasso)
                             ? fit.tau_hat * lambda
                             : lambda;
    int idx = 0;
    for (int k = 0; k < p; ++k) {
      if (k == j) continue;
      fit.subgradient(idx) = scale > 0.0 ? full_corr(k) / scale : sgn(fit.gamma(idx));
      ++idx;
    }
  }

  fit.tau_tilde = std::sqrt(fit.tau_hat * fit.tau_hat +
                            lambda * fit.tau_hat * fit.gamma.cwiseAbs().sum());
  return fit;
}

std::pair<Vector, double> population_column(const PrecisionEstimate& theta0, int j) {
  detail::require_symmetric(theta0.theta, "population_column");
  const int p = theta0.p();
  if (j < 0 || j >= p) throw DimensionMismatch("population_column: index out of range");
  Eigen::LLT<Matrix> llt(theta0.theta);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("population_column: precision matrix is not PD");
  }
  const double tjj = theta0.theta(j, j);
  const double tau0_sq = 1.0 / tjj;
  Vector gamma0(p - 1);
  int r = 0;
  for (int k = 0; k < p; ++k) {
    if (k == j) continue;
    gamma0(r++) = -theta0.theta(k, j) / tjj;
  }
  return {gamma0, tau0_sq};
}

NodewiseEstimate assemble_precision(std::vector<NodewiseColumnFit> fits,
                                    TauVariant tau_variant,
                                    NodewiseRegressor regressor) {
  const int p = static_cast<int>(fits.size());
  if (p < 2) throw MissingColumn("assemble_precision: need at least two column fits");
  std::vector<const NodewiseColumnFit*> by_node(p, nullptr);
  for (const auto& f : fits) {
    if (f.node < 0 || f.node >= p || by_node[f.node] != nullptr) {
      throw MissingColumn("assemble_precision: fits must cover each node exactly once");
    }
    if (f.gamma.size() != p - 1) {
      throw DimensionMismatch("assemble_precision: gamma length mismatch");
    }
    by_node[f.node] = &f;
  }

  NodewiseEstimate est;
  est.tau_variant = tau_variant;
  est.regressor = regressor;
  est.theta = Matrix::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    const auto& f = *by_node[j];
    const double tau = tau_variant == TauVariant::tau_tilde ? f.tau_tilde : f.tau_hat;
    const double tau_sq = tau * tau;
    if (!(tau_sq > 0.0)) {
      throw DegenerateResidual("assemble_precision: nonpositive noise level");
    }
    est.theta(j, j) = 1.0 / tau_sq;
    int r = 0;
    for (int k = 0; k < p; ++k) {
      if (k == j) continue;
      est.theta(k, j) = -f.gamma(r) / tau_sq;
      ++r;
    }
  }
  est.fits = std::move(fits);
  return est;
}

PrecisionEstimate NodewiseEstimate::as_precision() const {
  PrecisionEstimate est;
  est.theta = theta;
  est.provenance = regressor == NodewiseRegressor::sqrt_lasso
                       ? Provenance::nodewise_sqrt
                       : Provenance::nodewise_lasso;
  est.lambda_used = fits.empty() ? 0.0 : fits.front().lambda;
  est.converged = true;
  for (const auto& f : fits) est.converged = est.converged && f.converged;
  return est;
}

NodewiseEstimate fit_nodewise(const DataMatrix& data, double lambda,
                              NodewiseRegressor regressor, TauVariant tau_variant,
                              const CovarianceEstimate& cov) {
  const int p = data.p();
  std::vector<NodewiseColumnFit> fits(p);
  parallel_for(p, [&](int j) {
    fits[j] = fit_node_column(data, j, lambda, regressor, cov);
  });
  return assemble_precision(std::move(fits), tau_variant, regressor);
}

}  // namespace precis
