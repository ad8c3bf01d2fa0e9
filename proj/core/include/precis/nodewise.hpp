#pragma once

#include <utility>
#include <vector>

#include "precis/model.hpp"

namespace precis {

enum class NodewiseRegressor { sqrt_lasso, lasso };
enum class TauVariant { tau_tilde, tau_hat };

struct NodewiseColumnFit {
  int node = 0;
  Vector gamma;  // length p-1, regressors in index order skipping the node
  double tau_hat = 0.0;
  double tau_tilde = 0.0;  // sqrt of tau_hat^2 + lambda tau_hat ||gamma||_1
  double lambda = 0.0;
  Vector subgradient;
  bool converged = true;
};

struct NodewiseEstimate {
  std::vector<NodewiseColumnFit> fits;
  Matrix theta;  // column j: 1/tau_j^2 on the diagonal, -gamma_jk/tau_j^2 off
  TauVariant tau_variant = TauVariant::tau_hat;
  NodewiseRegressor regressor = NodewiseRegressor::sqrt_lasso;

  PrecisionEstimate as_precision() const;
};

// L1-penalized regression of column j on the others, one penalty level for all
// regressors. The Gram matrix is sliced out of cov rather than recomputed from
// data; the residual is recomputed against the raw data for exact noise levels.
NodewiseColumnFit fit_node_column(const DataMatrix& data, int j, double lambda,
                                  NodewiseRegressor regressor,
                                  const CovarianceEstimate& cov);

// gamma0 and tau0^2 implied by a population precision matrix.
std::pair<Vector, double> population_column(const PrecisionEstimate& theta0, int j);

NodewiseEstimate assemble_precision(std::vector<NodewiseColumnFit> fits,
                                    TauVariant tau_variant,
                                    NodewiseRegressor regressor);

// Fits all p columns (in parallel) and assembles the estimate.
NodewiseEstimate fit_nodewise(const DataMatrix& data, double lambda,
                              NodewiseRegressor regressor, TauVariant tau_variant,
                              const CovarianceEstimate& cov);

}  // namespace precis
