#pragma once

#include <optional>
#include <vector>

#include "precis/model.hpp"

namespace precis {

struct LassoProblem {
  Matrix design;    // n x q
  Vector response;  // n
  double lambda = 0.0;
  Vector weights;  // q positive penalty weights; empty means all-ones

  int max_sweeps = 10000;
  double coef_tol = 1e-9;
  bool track_objective = false;

  int n() const { return static_cast<int>(design.rows()); }
  int q() const { return static_cast<int>(design.cols()); }
};

struct LassoSolution {
  Vector coefficients;
  std::optional<double> noise_level;  // tau_hat, square-root variant only
  Vector subgradient;
  int iterations = 0;  // coordinate-descent sweeps, summed over restarts
  bool converged = true;
  std::vector<double> objective_path;  // per sweep, when track_objective is set
};

enum class LassoVariant { lasso, sqrt };

// Minimizes ||y - A b||_2^2 / n + 2 lambda ||diag(weights) b||_1.
LassoSolution solve_lasso(const LassoProblem& prob);

// Minimizes ||y - A g||_2 / sqrt(n) + lambda ||diag(weights) g||_1 by alternating
// a lasso step at effective penalty lambda*tau with the residual-scale update.
LassoSolution solve_sqrt_lasso(const LassoProblem& prob);

struct KktReport {
  double max_violation = 0.0;
  int active_set_sign_errors = 0;
};

// Recomputes stationarity residuals from the raw design/response, independent of
// any cached quantities inside the solver.
KktReport kkt_report(const LassoProblem& prob, const LassoSolution& sol, LassoVariant variant);

namespace detail {

// Cyclic coordinate descent on the Gram form
//   f(b) = b' G b - 2 g' b + 2 sum_k penalty_k |b_k|   (+ constant),
// which is the lasso with G = A'A/n, g = A'y/n. beta is the warm start and the
// output; gb caches G*beta across calls.
struct GramLassoStatus {
  int sweeps = 0;
  bool converged = false;
};
GramLassoStatus gram_lasso(const Matrix& G, const Vector& g, const Vector& penalty,
                           Vector& beta, Vector& gb, double coef_tol, int max_sweeps,
                           std::vector<double>* objective_path = nullptr,
                           double objective_const = 0.0);

}  // namespace detail

}  // namespace precis
