#include "precis/models.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "precis/rng.hpp"
#include "precis/stats.hpp"

namespace precis {

namespace {

constexpr std::uint64_t kSaltModel2 = 0x6d32;

void certify_pd(const Matrix& theta, const char* what) {
  const auto diag = spectrum_diagnostic(theta);
  if (!(diag.lambda_min > 0.0)) {
    throw NotPositiveDefinite(std::string(what) + ": population matrix is not positive definite");
  }
}

Matrix model1_matrix(int p) {
  if (p < 6 || p % 2 != 0) {
    throw ValidationError("model1 needs an even p of at least 6 (two equal blocks)");
  }
  const int h = p / 2;
  Matrix theta = Matrix::Zero(p, p);
  const double bands[2][3] = {{1.0, 0.5, 0.4}, {2.0, 1.0, 0.6}};
  for (int blk = 0; blk < 2; ++blk) {
    const int off = blk * h;
    for (int i = 0; i < h; ++i) {
      theta(off + i, off + i) = bands[blk][0];
      if (i + 1 < h) {
        theta(off + i, off + i + 1) = bands[blk][1];
        theta(off + i + 1, off + i) = bands[blk][1];
      }
      if (i + 2 < h) {
        theta(off + i, off + i + 2) = bands[blk][2];
        theta(off + i + 2, off + i) = bands[blk][2];
      }
    }
  }
  return theta;
}

Matrix model3_matrix(int p) {
  Matrix theta(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) theta(i, j) = std::pow(0.5, std::abs(i - j));
  }
  return theta;
}

Matrix model2_like_matrix(int p, std::uint64_t seed) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt), kSaltModel2));
    Matrix k = Matrix::Zero(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        if (rng.next_uniform() < 0.07) {
          const double mag = 0.3 + 0.4 * rng.next_uniform();
          const double w = rng.next_uniform() < 0.5 ? -mag : mag;
          k(i, j) = w;
          k(j, i) = w;
        }
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(k, Eigen::EigenvaluesOnly);
    const double lift = std::abs(eig.eigenvalues().minCoeff()) + 0.1;
    Matrix theta_raw = k + lift * Matrix::Identity(p, p);

    // rescale so Sigma = Theta^-1 has unit diagonal; sparsity is preserved
    const Matrix sigma_raw = theta_raw.llt().solve(Matrix::Identity(p, p));
    Vector d = sigma_raw.diagonal().cwiseSqrt();
    Matrix theta = d.asDiagonal() * theta_raw * d.asDiagonal();
    theta = ((theta + theta.transpose()) * 0.5).eval();

    const auto diag = spectrum_diagnostic(theta);
    if (diag.lambda_min > 0.0) return theta;
  }
  throw NotPositiveDefinite("model2_like: resampling never produced a positive definite matrix");
}

}  // namespace

PrecisionEstimate make_model(Model model, int p, std::uint64_t seed) {
  if (p < 2) throw ValidationError("make_model: p must be at least 2");
  PrecisionEstimate est;
  est.provenance = Provenance::population;
  est.lambda_used = 0.0;
  est.converged = true;
  switch (model) {
    case Model::model1:
      est.theta = model1_matrix(p);
      break;
    case Model::model3:
      est.theta = model3_matrix(p);
      break;
    case Model::model2_like:
      est.theta = model2_like_matrix(p, seed);
      break;
    case Model::custom_dag:
      throw ValidationError("make_model: custom_dag models come from make_dag_instance");
  }
  certify_pd(est.theta, "make_model");
  return est;
}

DataMatrix sample_gaussian(const PrecisionEstimate& theta0, int n, std::uint64_t seed) {
  const int p = static_cast<int>(theta0.theta.rows());
  detail::require_symmetric(theta0.theta, "sample_gaussian: theta0");
  Eigen::LLT<Matrix> theta_chol(theta0.theta);
  if (theta_chol.info() != Eigen::Success) {
    throw NotPositiveDefinite("sample_gaussian: theta0 is not positive definite");
  }
  Matrix sigma = theta_chol.solve(Matrix::Identity(p, p));
  sigma = ((sigma + sigma.transpose()) * 0.5).eval();
  Eigen::LLT<Matrix> sigma_chol(sigma);
  if (sigma_chol.info() != Eigen::Success) {
    throw NotPositiveDefinite("sample_gaussian: implied covariance is not positive definite");
  }
  const Matrix l = sigma_chol.matrixL();

  Rng rng(seed);
  Matrix x(n, p);
  Vector z(p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) z(j) = rng.next_normal();
    x.row(i) = (l * z).transpose();
  }
  return DataMatrix(std::move(x));
}

PrecisionEstimate mle_estimator(const CovarianceEstimate& cov) {
  const int p = static_cast<int>(cov.sigma_hat.rows());
  if (cov.n > 0 && cov.n <= p) {
    throw SingularCovariance("mle: sample covariance is singular when n <= p");
  }
  Eigen::LLT<Matrix> chol(cov.sigma_hat);
  if (chol.info() != Eigen::Success) {
    throw SingularCovariance("mle: sample covariance is not positive definite");
  }
  Matrix theta = chol.solve(Matrix::Identity(p, p));
  PrecisionEstimate est;
  est.theta = ((theta + theta.transpose()) * 0.5).eval();
  est.provenance = Provenance::mle;
  est.lambda_used = 0.0;
  est.converged = true;
  return est;
}

PrecisionEstimate oracle_mle(const CovarianceEstimate& cov, const SparsityPattern& pattern) {
  const Matrix& s = cov.sigma_hat;
  const int p = static_cast<int>(s.rows());
  constexpr double kTol = 1e-8;
  constexpr int kMaxSweeps = 500;

  std::vector<std::vector<int>> neighbors(p);
  for (const auto& [i, j] : pattern.edges) {
    if (i < 0 || j < 0 || i >= p || j >= p) {
      throw DimensionMismatch("oracle_mle: pattern index out of range");
    }
    if (i == j) continue;
    neighbors[j].push_back(i);
  }
  for (auto& nb : neighbors) std::sort(nb.begin(), nb.end());

  auto rebuild = [&](const Matrix& w) {
    Matrix theta = Matrix::Zero(p, p);
    for (int j = 0; j < p; ++j) {
      Vector w12(p - 1), beta = Vector::Zero(p - 1);
      int r = 0;
      for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        w12(r) = w(i, j);
        ++r;
      }
      const auto& nb = neighbors[j];
      if (!nb.empty()) {
        const int q = static_cast<int>(nb.size());
        Matrix w11(q, q);
        Vector s12(q);
        for (int a = 0; a < q; ++a) {
          for (int b = 0; b < q; ++b) w11(a, b) = w(nb[a], nb[b]);
          s12(a) = s(nb[a], j);
        }
        const Vector bsub = w11.ldlt().solve(s12);
        if (!bsub.allFinite()) {
          throw NotConverged("oracle_mle: singular neighborhood block");
        }
        for (int a = 0; a < q; ++a) {
          const int idx = nb[a] < j ? nb[a] : nb[a] - 1;
          beta(idx) = bsub(a);
        }
      }
      const double schur = s(j, j) - w12.dot(beta);
      if (!(schur > 0.0)) throw NotConverged("oracle_mle: covariance iterate lost definiteness");
      theta(j, j) = 1.0 / schur;
      r = 0;
      for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        theta(i, j) = -beta(r) / schur;
        ++r;
      }
    }
    return ((theta + theta.transpose()) * 0.5).eval();
  };

  Matrix w = s;
  Matrix theta;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    for (int j = 0; j < p; ++j) {
      const auto& nb = neighbors[j];
      Vector w12 = Vector::Zero(p);
      if (!nb.empty()) {
        const int q = static_cast<int>(nb.size());
        Matrix w11(q, q);
        Vector s12(q);
        for (int a = 0; a < q; ++a) {
          for (int b = 0; b < q; ++b) w11(a, b) = w(nb[a], nb[b]);
          s12(a) = s(nb[a], j);
        }
        const Vector beta = w11.ldlt().solve(s12);
        if (!beta.allFinite()) {
          throw NotConverged("oracle_mle: singular neighborhood block");
        }
        for (int i = 0; i < p; ++i) {
          if (i == j) continue;
          double acc = 0.0;
          for (int a = 0; a < q; ++a) acc += w(i, nb[a]) * beta(a);
          w12(i) = acc;
        }
      }
      for (int i = 0; i < p; ++i) {
        if (i == j) continue;
        w(i, j) = w12(i);
        w(j, i) = w12(i);
      }
    }

    theta = rebuild(w);
    Eigen::LLT<Matrix> chol(theta);
    if (chol.info() != Eigen::Success) continue;
    const Matrix inv = chol.solve(Matrix::Identity(p, p));
    double resid = 0.0;
    for (int j = 0; j < p; ++j) {
      resid = std::max(resid, std::abs(inv(j, j) - s(j, j)));
      for (int i : neighbors[j]) resid = std::max(resid, std::abs(inv(i, j) - s(i, j)));
    }
    if (resid <= kTol) {
      PrecisionEstimate est;
      est.theta = theta;
      est.provenance = Provenance::oracle;
      est.lambda_used = 0.0;
      est.converged = true;
      return est;
    }
  }
  throw NotConverged("oracle_mle: proportional scaling did not reach stationarity");
}

PerfectReference perfect_reference(const PrecisionEstimate& theta0, int n, double alpha) {
  detail::require_symmetric(theta0.theta, "perfect_reference: theta0");
  certify_pd(theta0.theta, "perfect_reference");
  const int p = static_cast<int>(theta0.theta.rows());
  const double z = two_sided_z(alpha);
  PerfectReference out;
  out.lengths.resize(p, p);
  const double scale = 2.0 * z / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const double var =
          theta0.theta(i, i) * theta0.theta(j, j) + theta0.theta(i, j) * theta0.theta(i, j);
      out.lengths(i, j) = scale * std::sqrt(var);
    }
  }
  out.nominal_coverage = 100.0 * (1.0 - alpha);
  return out;
}

DagModel make_dag_instance(int p, double edge_prob, std::pair<double, double> beta_range,
                           double omega, std::uint64_t seed) {
  if (p < 2) throw ValidationError("make_dag_instance: p must be at least 2");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
    throw ValidationError("make_dag_instance: edge_prob must lie in [0, 1]");
  }
  if (!(omega > 0.0)) throw ValidationError("make_dag_instance: omega must be positive");
  if (!(beta_range.first >= 0.0 && beta_range.second >= beta_range.first)) {
    throw ValidationError("make_dag_instance: beta_range must be an ordered nonnegative pair");
  }

  Rng rng(seed);
  DagModel model;
  model.omega = omega;
  model.ordering.resize(p);
  for (int i = 0; i < p; ++i) model.ordering[i] = i;
  for (int i = p - 1; i > 0; --i) {
    const int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
    std::swap(model.ordering[i], model.ordering[k]);
  }

  model.b = Matrix::Zero(p, p);
  model.parents.assign(p, {});
  for (int a = 0; a < p; ++a) {
    for (int bpos = a + 1; bpos < p; ++bpos) {
      const int parent = model.ordering[a];
      const int child = model.ordering[bpos];
      if (rng.next_uniform() < edge_prob) {
        const double mag =
            beta_range.first + (beta_range.second - beta_range.first) * rng.next_uniform();
        const double w = rng.next_uniform() < 0.5 ? -mag : mag;
        model.b(parent, child) = w;
        model.parents[child].push_back(parent);
      }
    }
  }
  validate_dag(model);
  certify_pd(model.theta0(), "make_dag_instance");
  return model;
}

DagModel dag_from_edges(int p, const std::vector<std::tuple<int, int, double>>& edges,
                        double omega) {
  if (p < 2) throw ValidationError("dag_from_edges: p must be at least 2");
  if (!(omega > 0.0)) throw ValidationError("dag_from_edges: omega must be positive");
  DagModel model;
  model.omega = omega;
  model.ordering.resize(p);
  for (int i = 0; i < p; ++i) model.ordering[i] = i;
  model.b = Matrix::Zero(p, p);
  model.parents.assign(p, {});
  for (const auto& [k, j, w] : edges) {
    if (k < 0 || j < 0 || k >= p || j >= p) {
      throw DimensionMismatch("dag_from_edges: edge index out of range");
    }
    model.b(k, j) = w;
    model.parents[j].push_back(k);
  }
  validate_dag(model);
  certify_pd(model.theta0(), "dag_from_edges");
  return model;
}

DagModel chain_dag(int p, double beta, double omega) {
  std::vector<std::tuple<int, int, double>> edges;
  for (int j = 0; j + 1 < p; ++j) edges.emplace_back(j, j + 1, beta);
  return dag_from_edges(p, edges, omega);
}

}  // namespace precis
