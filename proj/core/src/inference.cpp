#include "precis/inference.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>

#include "precis/stats.hpp"

namespace precis {

DebiasedEstimate debias(const PrecisionEstimate& est, const CovarianceEstimate& cov,
                        bool use_correlation) {
  if (est.p() != cov.p()) {
    throw DimensionMismatch("debias: estimate and covariance sizes differ");
  }
  const Matrix& m = use_correlation ? cov.r_hat : cov.sigma_hat;
  const Matrix& th = est.theta;
  Matrix t = th + th.transpose() - th.transpose() * m * th;
  t = ((t + t.transpose()) * 0.5).eval();

  DebiasedEstimate out;
  out.t_hat = std::move(t);
  out.n = cov.n;
  out.source = est.provenance;
  return out;
}

Matrix variance_estimates(const PrecisionEstimate& est_for_variance) {
  const Matrix sym =
      (est_for_variance.theta + est_for_variance.theta.transpose()) * 0.5;
  const int p = static_cast<int>(sym.rows());
  for (int i = 0; i < p; ++i) {
    if (!(sym(i, i) > 0.0)) {
      throw NonPositiveDiagonal("variance_estimates: estimate has nonpositive diagonal");
    }
  }
  Matrix sigma(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      sigma(i, j) = std::sqrt(sym(i, i) * sym(j, j) + sym(i, j) * sym(i, j));
    }
  }
  return sigma;
}

DebiasedEstimate debias_with_variance(const PrecisionEstimate& est,
                                      const CovarianceEstimate& cov,
                                      bool use_correlation) {
  DebiasedEstimate out = debias(est, cov, use_correlation);
  out.sigma_hat = variance_estimates(est);
  return out;
}

ConfidenceGrid confidence_intervals(const DebiasedEstimate& deb, double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidAlpha("confidence_intervals: alpha must lie in (0,1)");
  }
  if (!deb.has_sigma()) {
    throw DimensionMismatch("confidence_intervals: variance estimates missing");
  }
  if (deb.n < 1) {
    throw DimensionMismatch("confidence_intervals: sample size missing");
  }
  ConfidenceGrid grid;
  grid.alpha = alpha;
  grid.z = two_sided_z(alpha);
  const Matrix half = (grid.z / std::sqrt(static_cast<double>(deb.n))) * deb.sigma_hat;
  grid.lower = deb.t_hat - half;
  grid.upper = deb.t_hat + half;
  return grid;
}

SparsityPattern edge_recovery(const DebiasedEstimate& deb, double alpha,
                              RecoveryRule rule) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw InvalidAlpha("edge_recovery: alpha must lie in (0,1)");
  }
  if (!deb.has_sigma()) {
    throw DimensionMismatch("edge_recovery: variance estimates missing");
  }
  const int p = deb.p();
  double level = alpha;
  if (rule == RecoveryRule::bonferroni) {
    level = alpha / (static_cast<double>(p) * (p - 1));
  }
  const double z = two_sided_z(level);
  const double root_n = std::sqrt(static_cast<double>(deb.n));

  Matrix selected = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      if (std::abs(deb.t_hat(i, j)) > z * deb.sigma_hat(i, j) / root_n) {
        selected(i, j) = 1.0;
      }
    }
  }
  return pattern_from_matrix(selected, 0.5);
}

IrrepDiagnostic irrepresentability_check(const PrecisionEstimate& theta0,
                                         const SparsityPattern& pattern) {
  detail::require_symmetric(theta0.theta, "irrepresentability_check");
  const int p = theta0.p();
  Eigen::LLT<Matrix> llt(theta0.theta);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("irrepresentability_check: theta0 is not PD");
  }
  const Matrix sigma = llt.solve(Matrix::Identity(p, p));

  // S: both orientations of every edge plus all diagonal pairs, sorted by flat index
  std::vector<std::pair<int, int>> s_pairs;
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) {
      if (i == j || pattern.has_edge(i, j) || pattern.has_edge(j, i)) {
        s_pairs.push_back({i, j});
      }
    }
  }
  const int m = static_cast<int>(s_pairs.size());

  auto hval = [&](const std::pair<int, int>& a, const std::pair<int, int>& b) {
    return sigma(a.first, b.first) * sigma(a.second, b.second);
  };

  Matrix hss(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) hss(a, b) = hval(s_pairs[a], s_pairs[b]);
  }
  Eigen::FullPivLU<Matrix> lu(hss);
  if (!lu.isInvertible()) {
    throw SingularSubBlock("irrepresentability_check: H_SS is numerically singular");
  }
  const Matrix hss_inv = lu.inverse();

  IrrepDiagnostic diag;
  diag.kappa_H = hss_inv.cwiseAbs().colwise().sum().maxCoeff();
  diag.kappa_Sigma = sigma.cwiseAbs().colwise().sum().maxCoeff();

  std::vector<char> in_s(static_cast<size_t>(p) * p, 0);
  for (const auto& pr : s_pairs) in_s[static_cast<size_t>(pr.first) * p + pr.second] = 1;

  double worst = 0.0;
  Vector h_es(m);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (in_s[static_cast<size_t>(i) * p + j]) continue;
      const std::pair<int, int> e{i, j};
      for (int a = 0; a < m; ++a) h_es(a) = hval(e, s_pairs[a]);
      worst = std::max(worst, (hss_inv * h_es).cwiseAbs().sum());
    }
  }
  diag.alpha_margin = 1.0 - worst;
  diag.satisfied = diag.alpha_margin > 0.0;
  return diag;
}

}  // namespace precis
