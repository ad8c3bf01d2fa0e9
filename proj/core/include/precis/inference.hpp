#pragma once

#include "precis/model.hpp"

namespace precis {

struct DebiasedEstimate {
  Matrix t_hat;
  Matrix sigma_hat;  // entrywise standard-deviation estimates; empty until attached
  int n = 0;
  Provenance source = Provenance::population;

  int p() const { return static_cast<int>(t_hat.rows()); }
  bool has_sigma() const { return sigma_hat.size() > 0; }
};

struct ConfidenceGrid {
  Matrix lower;
  Matrix upper;
  double alpha = 0.0;
  double z = 0.0;
};

struct IrrepDiagnostic {
  double alpha_margin = 0.0;  // 1 - max_{e in S^c} ||H_eS (H_SS)^-1||_1
  double kappa_H = 0.0;       // l1 operator norm of (H_SS)^-1
  double kappa_Sigma = 0.0;   // l1 operator norm of Sigma_0
  bool satisfied = false;
};

enum class RecoveryRule { bonferroni, per_entry };

// T = Theta + Theta' - Theta' M Theta with M the sample covariance, or the
// sample correlation when use_correlation is set (normalized estimates target
// the inverse correlation matrix). Output symmetrized exactly.
DebiasedEstimate debias(const PrecisionEstimate& est, const CovarianceEstimate& cov,
                        bool use_correlation = false);

// sigma_ij = sqrt(Theta_ii Theta_jj + Theta_ij^2) from the symmetrized estimate.
Matrix variance_estimates(const PrecisionEstimate& est_for_variance);

// Convenience: debias and attach variances from the same initial estimate.
DebiasedEstimate debias_with_variance(const PrecisionEstimate& est,
                                      const CovarianceEstimate& cov,
                                      bool use_correlation = false);

ConfidenceGrid confidence_intervals(const DebiasedEstimate& deb, double alpha);

SparsityPattern edge_recovery(const DebiasedEstimate& deb, double alpha,
                              RecoveryRule rule);

// Margin of the irrepresentability condition for the Hessian Sigma0 (x) Sigma0,
// with the index set S holding both orientations of each edge plus the diagonal.
IrrepDiagnostic irrepresentability_check(const PrecisionEstimate& theta0,
                                         const SparsityPattern& pattern);

}  // namespace precis
