#pragma once

#include "precis/model.hpp"

namespace precis {

struct GlassoConfig {
  enum class Variant { plain, weighted, normalized };

  double lambda = 0.0;
  Variant variant = Variant::plain;
  double tol = 1e-7;    // KKT tolerance on the returned estimate
  int max_iter = 1000;  // outer column sweeps
};

// l1-penalized Gaussian maximum likelihood with unpenalized diagonal.
//   plain:      loss on sigma_hat, penalty lambda |Theta_ij|
//   weighted:   loss on sigma_hat, penalty lambda w_i w_j |Theta_ij|
//   normalized: loss on r_hat,     penalty lambda |Theta_ij|
// Block coordinate descent on the covariance iterate, one lasso subproblem per
// column; the primal estimate is rebuilt each sweep and certified against the
// KKT conditions before the solve is reported converged.
PrecisionEstimate solve_graphical_lasso(const CovarianceEstimate& cov,
                                        const GlassoConfig& cfg);

// Rescales a normalized (correlation-scale) solution back to covariance scale.
PrecisionEstimate weighted_from_normalized(const PrecisionEstimate& norm_est,
                                           const CovarianceEstimate& cov);

struct GlassoKktReport {
  double max_offdiag_violation = 0.0;
  double max_diag_residual = 0.0;
  double max_subgradient_abs = 0.0;
  double max_violation = 0.0;  // max of the two residuals
};

GlassoKktReport glasso_kkt_report(const PrecisionEstimate& theta,
                                  const CovarianceEstimate& cov,
                                  const GlassoConfig& cfg);

}  // namespace precis
