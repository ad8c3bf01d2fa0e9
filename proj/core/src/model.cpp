#include "precis/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace precis {

namespace detail {

bool is_finite(const Matrix& m) { return m.allFinite(); }

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw NotSymmetric(std::string(what) + ": matrix is not square");
  }
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    throw NotSymmetric(std::string(what) + ": matrix is not symmetric");
  }
}

}  // namespace detail

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 2) {
    throw DimensionMismatch("data matrix needs n >= 2 observations");
  }
  if (values_.cols() < 2) {
    throw DimensionMismatch("data matrix needs p >= 2 variables");
  }
  if (!detail::is_finite(values_)) {
    throw NonFiniteInput("data matrix contains non-finite entries");
  }
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::glasso: return "glasso";
    case Provenance::glasso_weighted: return "glasso_weighted";
    case Provenance::glasso_normalized: return "glasso_normalized";
    case Provenance::nodewise_sqrt: return "nodewise_sqrt";
    case Provenance::nodewise_lasso: return "nodewise_lasso";
    case Provenance::mle: return "mle";
    case Provenance::oracle: return "oracle";
    case Provenance::population: return "population";
  }
  return "unknown";
}

CovarianceEstimate sample_covariance(const DataMatrix& data, bool center) {
  const Matrix& x = data.values();
  const int n = data.n();
  const int p = data.p();

  for (int j = 0; j < p; ++j) {
    double first = x(0, j);
    bool all_equal = true;
    for (int i = 1; i < n; ++i) {
      if (x(i, j) != first) {
        all_equal = false;
        break;
      }
    }
    if (all_equal) throw ZeroVarianceColumn(j);
  }

  Matrix xc = x;
  if (center) {
    Vector means = x.colwise().mean();
    xc.rowwise() -= means.transpose();
  }

  CovarianceEstimate out;
  out.n = n;
  out.centered = center;
  out.sigma_hat = (xc.transpose() * xc) / static_cast<double>(n);
  // enforce exact symmetry (X'X is symmetric up to rounding of the BLAS path)
  out.sigma_hat = ((out.sigma_hat + out.sigma_hat.transpose()) * 0.5).eval();

  out.w_hat = out.sigma_hat.diagonal().cwiseSqrt();
  for (int j = 0; j < p; ++j) {
    if (!(out.w_hat(j) > 0.0)) throw ZeroVarianceColumn(j);
  }
  Vector winv = out.w_hat.cwiseInverse();
  out.r_hat = winv.asDiagonal() * out.sigma_hat * winv.asDiagonal();
  out.r_hat = ((out.r_hat + out.r_hat.transpose()) * 0.5).eval();
  out.r_hat.diagonal().setOnes();
  return out;
}

CovarianceEstimate covariance_from_population(const Matrix& sigma0) {
  detail::require_symmetric(sigma0, "covariance_from_population");
  CovarianceEstimate out;
  out.population = true;
  out.n = 0;
  out.sigma_hat = ((sigma0 + sigma0.transpose()) * 0.5).eval();
  out.w_hat = out.sigma_hat.diagonal().cwiseSqrt();
  for (int j = 0; j < out.p(); ++j) {
    if (!(out.w_hat(j) > 0.0)) throw NonPositiveDiagonal("population covariance has non-positive diagonal");
  }
  Vector winv = out.w_hat.cwiseInverse();
  out.r_hat = winv.asDiagonal() * out.sigma_hat * winv.asDiagonal();
  out.r_hat = ((out.r_hat + out.r_hat.transpose()) * 0.5).eval();
  out.r_hat.diagonal().setOnes();
  return out;
}

SparsityPattern pattern_from_matrix(const Matrix& theta, double tol) {
  if (theta.rows() != theta.cols()) {
    throw DimensionMismatch("pattern_from_matrix expects a square matrix");
  }
  const int p = static_cast<int>(theta.rows());
  SparsityPattern pat;
  pat.per_node_degree.assign(p, 0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      if (std::abs(theta(i, j)) > tol) {
        pat.edges.insert({i, j});
        pat.per_node_degree[i] += 1;
      }
    }
  }
  pat.edge_count = static_cast<int>(pat.edges.size());
  pat.max_degree = pat.per_node_degree.empty()
                       ? 0
                       : *std::max_element(pat.per_node_degree.begin(), pat.per_node_degree.end());
  return pat;
}

SpectrumDiagnostic spectrum_diagnostic(const Matrix& m) {
  detail::require_symmetric(m, "spectrum_diagnostic");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  SpectrumDiagnostic d;
  d.lambda_min = es.eigenvalues().minCoeff();
  d.lambda_max = es.eigenvalues().maxCoeff();
  d.l_empirical = std::max(d.lambda_min > 0.0 ? 1.0 / d.lambda_min
                                              : std::numeric_limits<double>::infinity(),
                           d.lambda_max);
  return d;
}

}  // namespace precis
