#include "precis/lasso.hpp"

#include <cmath>
#include <limits>

namespace precis {

namespace {

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;  // ties at |x| == t stay at zero
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void validate_problem(const LassoProblem& prob) {
  if (prob.design.rows() != prob.response.size()) {
    throw DimensionMismatch("lasso: design rows must match response length");
  }
  if (prob.design.rows() < 1 || prob.design.cols() < 1) {
    throw DimensionMismatch("lasso: empty design");
  }
  if (!(prob.lambda >= 0.0)) {
    throw ValidationError("lasso: lambda must be nonnegative");
  }
  if (!prob.design.allFinite() || !prob.response.allFinite()) {
    throw NonFiniteInput("lasso: non-finite design or response");
  }
  if (prob.weights.size() != 0) {
    if (prob.weights.size() != prob.design.cols()) {
      throw DimensionMismatch("lasso: weights length must match design columns");
    }
    if (!(prob.weights.minCoeff() > 0.0)) {
      throw ValidationError("lasso: penalty weights must be strictly positive");
    }
  }
}

Vector effective_weights(const LassoProblem& prob) {
  if (prob.weights.size() != 0) return prob.weights;
  return Vector::Ones(prob.design.cols());
}

}  // namespace

namespace detail {

GramLassoStatus gram_lasso(const Matrix& G, const Vector& g, const Vector& penalty,
                           Vector& beta, Vector& gb, double coef_tol, int max_sweeps,
                           std::vector<double>* objective_path, double objective_const) {
  const int q = static_cast<int>(G.rows());
  GramLassoStatus status;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int k = 0; k < q; ++k) {
      const double gkk = G(k, k);
      const double old = beta(k);
      double next;
      if (gkk > 0.0) {
        const double partial = g(k) - (gb(k) - gkk * old);
        next = soft_threshold(partial, penalty(k)) / gkk;
      } else {
        next = 0.0;  // explained-variance-free column; KKT holds iff |g_k| <= penalty
      }
      const double delta = next - old;
      if (delta != 0.0) {
        gb.noalias() += G.col(k) * delta;
        beta(k) = next;
        const double change = std::abs(delta);
        if (change > max_change) max_change = change;
      }
    }
    ++status.sweeps;
    if (objective_path) {
      const double obj = beta.dot(gb) - 2.0 * g.dot(beta) +
                         2.0 * penalty.dot(beta.cwiseAbs()) + objective_const;
      objective_path->push_back(obj);
    }
    // refresh the cached gradient now and then to keep rounding drift in check
    if ((status.sweeps & 63) == 0) gb.noalias() = G * beta;
    if (max_change <= coef_tol) {
      status.converged = true;
      break;
    }
  }
  return status;
}

}  // namespace detail

LassoSolution solve_lasso(const LassoProblem& prob) {
  validate_problem(prob);
  const int n = prob.n();
  const int q = prob.q();
  const Vector w = effective_weights(prob);

  const Matrix G = (prob.design.transpose() * prob.design) / static_cast<double>(n);
  const Vector g = (prob.design.transpose() * prob.response) / static_cast<double>(n);
  const double y_sq_n = prob.response.squaredNorm() / static_cast<double>(n);
  const Vector penalty = prob.lambda * w;

  LassoSolution sol;
  sol.coefficients = Vector::Zero(q);
  Vector gb = Vector::Zero(q);
  auto status = detail::gram_lasso(G, g, penalty, sol.coefficients, gb, prob.coef_tol,
                                   prob.max_sweeps,
                                   prob.track_objective ? &sol.objective_path : nullptr,
                                   y_sq_n);
  sol.iterations = status.sweeps;
  sol.converged = status.converged;

  const Vector r = prob.response - prob.design * sol.coefficients;
  const Vector corr = (prob.design.transpose() * r) / static_cast<double>(n);
  sol.subgradient.resize(q);
  for (int k = 0; k < q; ++k) {
    if (prob.lambda > 0.0) {
      sol.subgradient(k) = corr(k) / (prob.lambda * w(k));
    } else {
      sol.subgradient(k) = sgn(sol.coefficients(k));
    }
  }
  return sol;
}

LassoSolution solve_sqrt_lasso(const LassoProblem& prob) {
  validate_problem(prob);
  const int n = prob.n();
  const int q = prob.q();
  const Vector w = effective_weights(prob);

  const Matrix G = (prob.design.transpose() * prob.design) / static_cast<double>(n);
  const Vector g = (prob.design.transpose() * prob.response) / static_cast<double>(n);
  const double y_sq_n = prob.response.squaredNorm() / static_cast<double>(n);

  LassoSolution sol;
  sol.coefficients = Vector::Zero(q);
  Vector gb = Vector::Zero(q);

  double tau = std::sqrt(y_sq_n);
  if (tau < 1e-10) {
    throw DegenerateResidual("sqrt lasso: response is numerically zero");
  }

  bool inner_ok = true;
  bool outer_ok = false;
  const int max_alternations = 200;
  for (int it = 0; it < max_alternations; ++it) {
    const Vector penalty = (prob.lambda * tau) * w;
    auto status = detail::gram_lasso(G, g, penalty, sol.coefficients, gb, prob.coef_tol,
                                     prob.max_sweeps,
                                     prob.track_objective ? &sol.objective_path : nullptr,
                                     y_sq_n);
    sol.iterations += status.sweeps;
    inner_ok = status.converged;

    const double rss_n = std::max(
        y_sq_n - 2.0 * g.dot(sol.coefficients) + sol.coefficients.dot(gb), 0.0);
    const double tau_new = std::sqrt(rss_n);
    if (tau_new < 1e-10) {
      throw DegenerateResidual("sqrt lasso: residual collapsed (lambda too small)");
    }
    const bool stable = std::abs(tau_new - tau) <= 1e-8 * std::max(1.0, tau);
    tau = tau_new;
    if (stable) {
      outer_ok = true;
      break;
    }
  }
  sol.converged = inner_ok && outer_ok;

  // final residual from the raw data, free of Gram-form cancellation
  const Vector r = prob.response - prob.design * sol.coefficients;
  const double tau_hat = r.norm() / std::sqrt(static_cast<double>(n));
  if (tau_hat < 1e-10) {
    throw DegenerateResidual("sqrt lasso: residual collapsed (lambda too small)");
  }
  sol.noise_level = tau_hat;

  const Vector corr = (prob.design.transpose() * r) / static_cast<double>(n);
  sol.subgradient.resize(q);
  for (int k = 0; k < q; ++k) {
    if (prob.lambda > 0.0) {
      sol.subgradient(k) = corr(k) / (tau_hat * prob.lambda * w(k));
    } else {
      sol.subgradient(k) = sgn(sol.coefficients(k));
    }
  }
  return sol;
}

KktReport kkt_report(const LassoProblem& prob, const LassoSolution& sol,
                     LassoVariant variant) {
  if (sol.coefficients.size() != prob.design.cols()) {
    throw DimensionMismatch("kkt_report: coefficient length mismatch");
  }
  const int n = prob.n();
  const int q = prob.q();
  const Vector w = effective_weights(prob);

  const Vector r = prob.response - prob.design * sol.coefficients;
  Vector corr = (prob.design.transpose() * r) / static_cast<double>(n);
  if (variant == LassoVariant::sqrt) {
    const double tau = r.norm() / std::sqrt(static_cast<double>(n));
    if (tau <= 0.0) {
      return {std::numeric_limits<double>::infinity(), 0};
    }
    corr /= tau;
  }

  KktReport report;
  for (int k = 0; k < q; ++k) {
    const double bound = prob.lambda * w(k);
    double viol;
    if (sol.coefficients(k) != 0.0) {
      viol = std::abs(corr(k) - bound * sgn(sol.coefficients(k)));
      const double kappa = bound > 0.0 ? corr(k) / bound : sgn(sol.coefficients(k));
      if (std::abs(kappa - sgn(sol.coefficients(k))) > 1e-6 && bound > 0.0) {
        report.active_set_sign_errors += 1;
      }
    } else {
      viol = std::max(std::abs(corr(k)) - bound, 0.0);
    }
    if (viol > report.max_violation) report.max_violation = viol;
  }
  return report;
}

}  // namespace precis
