#pragma once

#include <Eigen/Dense>
#include <set>
#include <utility>
#include <vector>

#include "precis/errors.hpp"

namespace precis {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// n x p observation matrix, rows = observations.
class DataMatrix {
 public:
  explicit DataMatrix(Matrix values);

  int n() const { return static_cast<int>(values_.rows()); }
  int p() const { return static_cast<int>(values_.cols()); }
  const Matrix& values() const { return values_; }

 private:
  Matrix values_;
};

struct CovarianceEstimate {
  Matrix sigma_hat;  // X'X/n
  Matrix r_hat;      // W^-1 sigma_hat W^-1
  Vector w_hat;      // sqrt(diag(sigma_hat))
  int n = 0;
  bool centered = false;
  bool population = false;

  int p() const { return static_cast<int>(sigma_hat.rows()); }
};

enum class Provenance {
  glasso,
  glasso_weighted,
  glasso_normalized,
  nodewise_sqrt,
  nodewise_lasso,
  mle,
  oracle,
  population,
};

const char* provenance_name(Provenance p);

struct PrecisionEstimate {
  Matrix theta;
  Provenance provenance = Provenance::population;
  double lambda_used = 0.0;
  bool converged = true;

  int p() const { return static_cast<int>(theta.rows()); }
};

// Ordered off-diagonal index pairs; undirected patterns carry both (i,j) and (j,i).
struct SparsityPattern {
  std::set<std::pair<int, int>> edges;
  std::vector<int> per_node_degree;
  int max_degree = 0;
  int edge_count = 0;

  bool has_edge(int i, int j) const {
    return edges.find({i, j}) != edges.end();
  }
};

struct SpectrumDiagnostic {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double l_empirical = 0.0;  // max(1/lambda_min, lambda_max)
};

// Sigma_hat = X'X/n by default; center subtracts column means first (divisor stays n).
CovarianceEstimate sample_covariance(const DataMatrix& data, bool center = false);

// Treats a population covariance as a CovarianceEstimate (for debiasing/KKT reports).
CovarianceEstimate covariance_from_population(const Matrix& sigma0);

SparsityPattern pattern_from_matrix(const Matrix& theta, double tol);

SpectrumDiagnostic spectrum_diagnostic(const Matrix& m);

namespace detail {
void require_symmetric(const Matrix& m, const char* what);
bool is_finite(const Matrix& m);
}  // namespace detail

}  // namespace precis
