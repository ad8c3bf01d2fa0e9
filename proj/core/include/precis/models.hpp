#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "precis/dag.hpp"
#include "precis/model.hpp"

namespace precis {

enum class Model { model1, model2_like, model3, custom_dag };

// Population precision matrices for the simulation study.
//   model1: two equal blocks, each five-diagonal with elements (1, 0.5, 0.4)
//           and (2, 1, 0.6); p must be even.
//   model3: Theta_ij = 0.5^|i-j| (complete graph).
//   model2_like: seeded sparse random graph, edge probability 0.07, weights
//           uniform on +-[0.3, 0.7], lifted to PD and rescaled so the implied
//           covariance is a correlation matrix.
// The seed only matters for model2_like.
PrecisionEstimate make_model(Model model, int p, std::uint64_t seed = 0);

// n rows of N(0, theta0^-1); same seed gives a bit-identical matrix.
DataMatrix sample_gaussian(const PrecisionEstimate& theta0, int n, std::uint64_t seed);

// Theta = sigma_hat^-1.
PrecisionEstimate mle_estimator(const CovarianceEstimate& cov);

// Gaussian MLE constrained to the given zero pattern, by iterative proportional
// scaling; stationarity (Theta^-1)_ij = sigma_hat_ij on the pattern and the
// diagonal to 1e-8.
PrecisionEstimate oracle_mle(const CovarianceEstimate& cov, const SparsityPattern& pattern);

struct PerfectReference {
  Matrix lengths;  // 2 z sigma_ij / sqrt(n), sigma_ij^2 = Theta_ii Theta_jj + Theta_ij^2
  double nominal_coverage = 0.0;  // 100 (1 - alpha)
};

PerfectReference perfect_reference(const PrecisionEstimate& theta0, int n, double alpha);

// Random ordering, Bernoulli(edge_prob) edges below it, weights uniform on
// +-[beta_range.first, beta_range.second], equal noise scale omega.
DagModel make_dag_instance(int p, double edge_prob,
                           std::pair<double, double> beta_range, double omega,
                           std::uint64_t seed);

// Explicit edge list (parent, child, weight) under the identity ordering.
DagModel dag_from_edges(int p, const std::vector<std::tuple<int, int, double>>& edges,
                        double omega);

// parent j -> j+1 chain with a common weight.
DagModel chain_dag(int p, double beta, double omega);

}  // namespace precis
