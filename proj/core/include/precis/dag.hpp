#pragma once

#include <cstdint>
#include <vector>

#include "precis/model.hpp"

namespace precis {

struct DagModel {
  Matrix b;       // b(k, j) is the weight of edge k -> j; zero diagonal
  double omega = 1.0;
  std::vector<int> ordering;  // ordering[position] = node
  std::vector<std::vector<int>> parents;

  int p() const { return static_cast<int>(b.rows()); }
  // (I - B)(I - B)' / omega^2
  Matrix theta0() const;
  Matrix sigma0() const;
};

// Validates acyclicity: permuted by ordering, b must be strictly lower triangular.
void validate_dag(const DagModel& model);

struct OrderingScore {
  std::vector<int> ordering;
  Matrix b_hat;
  Vector residual_variances;  // RSS_j / n
  double omega_hat_sq = 0.0;  // pooled, sum_j RSS_j / (n p)
  int edge_count = 0;
  double score = 0.0;  // p log(sum_j RSS_j / (n p)) + lambda^2 * edge_count
};

enum class SearchMode { exhaustive, greedy };

// Equal-variance profile likelihood of an ordering with l0-penalized per-node
// support selection (exhaustive subsets up to 10 predecessors, forward stepwise
// beyond, max parents capped at 0.5 n / log p), iterated to a fixed point.
OrderingScore score_ordering(const DataMatrix& data, const std::vector<int>& pi,
                             double lambda);

// exhaustive: all p! orderings (p <= 9), ties broken lexicographically.
// greedy: adjacent-transposition hill climbing from 16 seeded random starts.
OrderingScore search_ordering(const DataMatrix& data, double lambda, SearchMode mode,
                              std::uint64_t seed = 0);

// Nodes strictly before j in the ordering, in ordering positions.
std::vector<int> predecessors_of(const std::vector<int>& ordering, int j);

// Lasso of X_j on its predecessors; empty coefficient vector for the first node.
Vector predecessor_regression(const DataMatrix& data, const std::vector<int>& ordering,
                              int j, double lambda_j);

struct DagColumnInference {
  int node = 0;
  std::vector<int> predecessors;
  Vector beta_hat;
  Vector b_debiased;
  Vector sigma;  // per-predecessor standard-deviation estimates
  double omega_hat = 0.0;
};

DagColumnInference debias_dag_column(const DataMatrix& data,
                                     const std::vector<int>& ordering, int j,
                                     double lambda_j, double lambda_kj);

struct DagFit {
  OrderingScore search;
  std::vector<int> ordering_hat;
  std::vector<DagColumnInference> columns;  // one per node, in node order
};

struct DagFitOptions {
  double lambda = -1.0;     // l0 score penalty; < 0 means sqrt(log p / n)
  double lambda_j = -1.0;   // predecessor-regression penalty; < 0 means default
  double lambda_kj = -1.0;  // surrogate-inverse penalty; < 0 means default
  SearchMode mode = SearchMode::exhaustive;
  std::uint64_t seed = 0;
  const std::vector<int>* known_ordering = nullptr;  // skips the search
};

DagFit fit_dag(const DataMatrix& data, const DagFitOptions& opts);

}  // namespace precis
