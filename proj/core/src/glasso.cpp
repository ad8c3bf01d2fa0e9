#include "precis/glasso.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "precis/lasso.hpp"

namespace precis {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// penalty matrix per variant (zero diagonal), plus the loss matrix S
struct ProblemMatrices {
  Matrix s;
  Matrix penalty;
};

ProblemMatrices problem_matrices(const CovarianceEstimate& cov, const GlassoConfig& cfg) {
  ProblemMatrices pm;
  const int p = cov.p();
  switch (cfg.variant) {
    case GlassoConfig::Variant::plain:
      pm.s = cov.sigma_hat;
      pm.penalty = Matrix::Constant(p, p, cfg.lambda);
      break;
    case GlassoConfig::Variant::weighted:
      pm.s = cov.sigma_hat;
      pm.penalty = cfg.lambda * (cov.w_hat * cov.w_hat.transpose());
      break;
    case GlassoConfig::Variant::normalized:
      pm.s = cov.r_hat;
      pm.penalty = Matrix::Constant(p, p, cfg.lambda);
      break;
  }
  pm.penalty.diagonal().setZero();
  return pm;
}

Provenance variant_provenance(GlassoConfig::Variant v) {
  switch (v) {
    case GlassoConfig::Variant::plain: return Provenance::glasso;
    case GlassoConfig::Variant::weighted: return Provenance::glasso_weighted;
    case GlassoConfig::Variant::normalized: return Provenance::glasso_normalized;
  }
  return Provenance::glasso;
}

struct KktCore {
  double offdiag = std::numeric_limits<double>::infinity();
  double diag = std::numeric_limits<double>::infinity();
  double zmax = 0.0;
  bool invertible = false;
};

// residuals of S - Theta^-1 + penalty .* sign(Theta) over the off-diagonal and
// the unpenalized-diagonal condition S_ii = (Theta^-1)_ii
KktCore kkt_core(const Matrix& theta, const Matrix& s, const Matrix& penalty) {
  KktCore out;
  const int p = static_cast<int>(theta.rows());
  Eigen::LLT<Matrix> llt(theta);
  if (llt.info() != Eigen::Success) return out;
  out.invertible = true;
  const Matrix inv = llt.solve(Matrix::Identity(p, p));
  const Matrix m = s - inv;
  out.offdiag = 0.0;
  out.diag = 0.0;
  for (int i = 0; i < p; ++i) {
    out.diag = std::max(out.diag, std::abs(m(i, i)));
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      double viol;
      if (theta(i, j) != 0.0) {
        viol = std::abs(m(i, j) + penalty(i, j) * sgn(theta(i, j)));
      } else {
        viol = std::max(std::abs(m(i, j)) - penalty(i, j), 0.0);
      }
      out.offdiag = std::max(out.offdiag, viol);
      if (penalty(i, j) > 0.0) {
        out.zmax = std::max(out.zmax, std::abs(m(i, j)) / penalty(i, j));
      }
    }
  }
  return out;
}

Matrix rebuild_primal(const Matrix& s, const Matrix& w, const Matrix& b) {
  const int p = static_cast<int>(s.rows());
  Matrix theta = Matrix::Zero(p, p);
  for (int j = 0; j < p; ++j) {
    double quad = 0.0;
    int r = 0;
    for (int i = 0; i < p; ++i) {
      if (i == j) continue;
      quad += w(i, j) * b(r, j);
      ++r;
    }
    const double schur = s(j, j) - quad;
    if (!(schur > 0.0)) return Matrix();  // lost positive definiteness
    const double tjj = 1.0 / schur;
    theta(j, j) = tjj;
    r = 0;
    for (int i = 0; i < p; ++i) {
      if (i == j) continue;
      theta(i, j) = -b(r, j) * tjj;
      ++r;
    }
  }
  return ((theta + theta.transpose()) * 0.5).eval();
}

}  // namespace

PrecisionEstimate solve_graphical_lasso(const CovarianceEstimate& cov,
                                        const GlassoConfig& cfg) {
  if (!(cfg.lambda >= 0.0)) throw ValidationError("glasso: lambda must be nonnegative");
  if (!(cfg.tol > 0.0)) throw ValidationError("glasso: tol must be positive");
  const auto pm = problem_matrices(cov, cfg);
  const Matrix& s = pm.s;
  const int p = static_cast<int>(s.rows());

  if (cfg.lambda == 0.0) {
    // LLT succeeds on rank-deficient matrices whose zero pivot rounds up, so
    // gate on the spectrum instead
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues().minCoeff();
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmin > 1e-12 * std::max(1.0, lmax))) {
      throw SingularCovariance(
          "glasso: lambda = 0 requires a positive-definite covariance (no MLE otherwise)");
    }
  }

  // dual (covariance) iterate started at S itself; the unpenalized diagonal
  // pins diag(W) = diag(S), and exact column updates keep W positive definite
  Matrix w = s;
  Matrix b = Matrix::Zero(p - 1, p);  // lasso coefficients per column

  PrecisionEstimate est;
  est.provenance = variant_provenance(cfg.variant);
  est.lambda_used = cfg.lambda;
  est.converged = false;

  Matrix g11(p - 1, p - 1);
  Vector s12(p - 1), pen12(p - 1), beta(p - 1), gb(p - 1), w12(p - 1);

  Matrix best_theta;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    bool schur_ok = true;
    for (int j = 0; j < p; ++j) {
      int r = 0;
      for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        int c = 0;
        for (int k = 0; k < p; ++k) {
          if (k == j) continue;
          g11(r, c) = w(i, k);
          ++c;
        }
        s12(r) = s(i, j);
        pen12(r) = pm.penalty(i, j);
        beta(r) = b(r, j);
        ++r;
      }
      gb.noalias() = g11 * beta;
      detail::gram_lasso(g11, s12, pen12, beta, gb, 1e-10, 10000);
      w12.noalias() = g11 * beta;

      const double schur = s(j, j) - w12.dot(beta);
      if (!(schur > 1e-14 * std::max(1.0, s(j, j)))) {
        // keep the previous column; a later sweep gets another chance
        schur_ok = false;
        continue;
      }

      r = 0;
      for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        w(i, j) = w12(r);
        w(j, i) = w12(r);
        b(r, j) = beta(r);
        ++r;
      }
    }

    if (!schur_ok) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -cfg.tol) {
        throw NonPositiveDefiniteInput("glasso: covariance input is indefinite");
      }
      continue;
    }

    Matrix theta = rebuild_primal(s, w, b);
    if (theta.size() == 0) continue;
    best_theta = theta;
    const auto kkt = kkt_core(theta, s, pm.penalty);
    if (kkt.invertible && std::max(kkt.offdiag, kkt.diag) <= cfg.tol) {
      est.converged = true;
      break;
    }
  }

  if (best_theta.size() == 0) {
    // nothing usable was produced; fall back to the diagonal iterate
    best_theta = Matrix::Zero(p, p);
    for (int j = 0; j < p; ++j) best_theta(j, j) = 1.0 / s(j, j);
  }
  est.theta = best_theta;
  return est;
}

PrecisionEstimate weighted_from_normalized(const PrecisionEstimate& norm_est,
                                           const CovarianceEstimate& cov) {
  if (norm_est.provenance != Provenance::glasso_normalized) {
    throw ProvenanceMismatch(
        "weighted_from_normalized expects a glasso_normalized estimate");
  }
  if (norm_est.p() != cov.p()) {
    throw DimensionMismatch("weighted_from_normalized: size mismatch");
  }
  const Vector winv = cov.w_hat.cwiseInverse();
  PrecisionEstimate out;
  out.theta = winv.asDiagonal() * norm_est.theta * winv.asDiagonal();
  out.provenance = Provenance::glasso_weighted;
  out.lambda_used = norm_est.lambda_used;
  out.converged = norm_est.converged;
  return out;
}

GlassoKktReport glasso_kkt_report(const PrecisionEstimate& theta,
                                  const CovarianceEstimate& cov,
                                  const GlassoConfig& cfg) {
  detail::require_symmetric(theta.theta, "glasso_kkt_report");
  if (theta.p() != cov.p()) throw DimensionMismatch("glasso_kkt_report: size mismatch");
  const auto pm = problem_matrices(cov, cfg);
  const auto core = kkt_core(theta.theta, pm.s, pm.penalty);
  if (!core.invertible) {
    throw NotPositiveDefinite("glasso_kkt_report: estimate is not positive definite");
  }
  GlassoKktReport report;
  report.max_offdiag_violation = core.offdiag;
  report.max_diag_residual = core.diag;
  report.max_subgradient_abs = core.zmax;
  report.max_violation = std::max(core.offdiag, core.diag);
  return report;
}

}  // namespace precis
