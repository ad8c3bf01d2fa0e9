// End-to-end acceptance checks: reference-value reproductions, solver-oracle
// equivalences, and distributional properties of the inference pipeline.
// Each criterion prints one [PASS]/[FAIL] verdict line with its measurements;
// the exit status is the number of failed criteria. Pass criterion numbers as
// arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "precis/dag.hpp"
#include "precis/experiment.hpp"
#include "precis/glasso.hpp"
#include "precis/inference.hpp"
#include "precis/lasso.hpp"
#include "precis/models.hpp"
#include "precis/nodewise.hpp"
#include "precis/stats.hpp"

namespace {

using precis::CovarianceEstimate;
using precis::DataMatrix;
using precis::ExperimentConfig;
using precis::GlassoConfig;
using precis::LassoProblem;
using precis::Matrix;
using precis::Method;
using precis::Model;
using precis::PrecisionEstimate;
using precis::Vector;

using Clock = std::chrono::steady_clock;

std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

class Criterion {
 public:
  Criterion(int id, const char* title) : id_(id), start_(Clock::now()) {
    std::printf("-- criterion %d: %s\n", id, title);
  }

  void expect(bool cond, const std::string& detail) {
    std::printf("   %s  %s\n", cond ? "ok  " : "MISS", detail.c_str());
    ok_ = ok_ && cond;
  }

  void within(double value, double target, double tol, const char* label) {
    expect(std::abs(value - target) <= tol,
           strf("%s = %.4f (want %.4f +/- %.3g)", label, value, target, tol));
  }

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  bool finish() {
    std::printf("[%s] criterion %d (%.1f s)\n", ok_ ? "PASS" : "FAIL", id_, elapsed());
    std::fflush(stdout);
    return ok_;
  }

 private:
  int id_;
  bool ok_ = true;
  Clock::time_point start_;
};

Matrix slow_inverse(const Matrix& m) {
  const int p = static_cast<int>(m.rows());
  Matrix inv(p, p);
  for (int c = 0; c < p; ++c) {
    Vector e = Vector::Zero(p);
    e(c) = 1.0;
    inv.col(c) = oracles::gauss_solve(m, e);
  }
  return inv;
}

bool in_support(const Matrix& theta0, int i, int j) {
  return i == j || theta0(i, j) != 0.0;
}

// Mean interval length over ordered pairs, split by support membership.
std::pair<double, double> mean_lengths(const Matrix& lengths, const Matrix& theta0) {
  const int p = static_cast<int>(theta0.rows());
  double s0 = 0.0, s0c = 0.0;
  long n0 = 0, n0c = 0;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (in_support(theta0, i, j)) {
        s0 += lengths(i, j);
        ++n0;
      } else {
        s0c += lengths(i, j);
        ++n0c;
      }
    }
  }
  return {s0 / n0, n0c ? s0c / n0c : 0.0};
}

double universal(int p, int n) { return std::sqrt(std::log(static_cast<double>(p)) / n); }

// ---------------------------------------------------------------------------

bool criterion1() {
  Criterion c(1, "deterministic reference interval lengths, model 1 at p=100");
  const auto theta0 = precis::make_model(Model::model1, 100);

  const auto ref200 = precis::perfect_reference(theta0, 200, 0.05);
  const auto [s0_200, s0c_200] = mean_lengths(ref200.lengths, theta0.theta);
  c.within(s0_200, 0.48, 0.01, "n=200 length S0");
  c.within(s0c_200, 0.40, 0.01, "n=200 length S0c");

  const auto ref400 = precis::perfect_reference(theta0, 400, 0.05);
  const auto [s0_400, s0c_400] = mean_lengths(ref400.lengths, theta0.theta);
  c.within(s0_400, 0.34, 0.01, "n=400 length S0");
  c.within(s0c_400, 0.29, 0.01, "n=400 length S0c");

  c.expect(c.elapsed() < 1.0, strf("runtime %.2f s < 1 s", c.elapsed()));
  return c.finish();
}

// Known deviation: the plain nodewise-lasso row ("node") measures S0 coverage
// 85.85 against the reference window 86.58..94.58 and is expected to MISS.
// A fixed-penalty lasso residual variance is biased upward by shrinkage, so
// 1/tau^2 underestimates the precision diagonal and diagonal coverage drops.
// Probed alternatives all measure worse on this exact replicate stream:
// penalty-inflated tau assemblies 67.5-72.1, refit-OLS on the support 62-84,
// per-column cross-validated penalties 83.9-85.5 (and those break the pinned
// reported-lambda clause). Matching the reference row appears to require
// noise-adaptive per-column penalties, i.e. the square-root regressor, whose
// rows do reproduce. The tau_hat assembly shipped here is the closest honest
// construction; every other clause of this criterion passes.
bool criterion2() {
  Criterion c(2, "coverage table reproduction, model 1, p=100, n=200");
  ExperimentConfig cfg;
  cfg.model = Model::model1;
  cfg.p = 100;
  cfg.n = 200;
  cfg.replicates = 100;
  cfg.methods = {Method::node_sqrt, Method::node, Method::mle};
  cfg.seed = 1;

  const auto rows = precis::run_coverage_experiment(cfg).rows();
  const auto& ns = rows[0];
  const auto& nd = rows[1];
  const auto& ml = rows[2];

  c.within(ns.coverage_s0, 89.92, 4.0, "node-sqrt coverage S0");
  c.within(ns.coverage_s0c, 94.02, 3.0, "node-sqrt coverage S0c");
  c.within(ns.length_s0, 0.48, 0.04, "node-sqrt length S0");
  c.within(ns.length_s0c, 0.42, 0.04, "node-sqrt length S0c");
  c.within(ns.avg_lambda, 0.152, 0.001, "node-sqrt lambda");
  c.within(nd.coverage_s0, 90.58, 4.0, "node coverage S0");
  c.within(nd.coverage_s0c, 96.77, 3.0, "node coverage S0c");
  c.within(nd.avg_lambda, 0.152, 0.001, "node lambda");
  c.within(ml.coverage_s0, 20.92, 7.0, "MLE coverage S0");
  c.expect(c.elapsed() < 1800.0, strf("runtime %.0f s < 1800 s", c.elapsed()));
  return c.finish();
}

bool criterion3() {
  Criterion c(3, "coverage table reproduction, model 1, p=100, n=400");
  ExperimentConfig cfg;
  cfg.model = Model::model1;
  cfg.p = 100;
  cfg.n = 400;
  cfg.replicates = 100;
  cfg.methods = {Method::node_sqrt};
  cfg.seed = 1;

  const auto row = precis::run_coverage_experiment(cfg).rows()[0];
  c.within(row.coverage_s0, 91.57, 4.0, "node-sqrt coverage S0");
  c.within(row.coverage_s0c, 94.40, 3.0, "node-sqrt coverage S0c");
  c.within(row.length_s0, 0.34, 0.04, "node-sqrt length S0");
  c.within(row.length_s0c, 0.29, 0.04, "node-sqrt length S0c");
  return c.finish();
}

bool criterion4() {
  Criterion c(4, "dense-support reproduction, model 3, p=100, n=200");
  ExperimentConfig cfg;
  cfg.model = Model::model3;
  cfg.p = 100;
  cfg.n = 200;
  cfg.replicates = 100;
  cfg.methods = {Method::node_sqrt, Method::glasso};
  cfg.seed = 1;
  cfg.lambda_policy = precis::LambdaPolicy::validation_grid;

  const auto table = precis::run_coverage_experiment(cfg);
  c.expect(table.s0c_count == 0, "support is complete, overall = S0 column");
  const auto rows = table.rows();
  c.within(rows[0].coverage_s0, 93.36, 3.0, "node-sqrt overall coverage");
  c.within(rows[0].length_s0, 0.28, 0.03, "node-sqrt overall length");
  c.within(rows[1].coverage_s0, 90.43, 4.0,
           strf("glasso (validation, avg lambda %.4f) overall coverage",
                rows[1].avg_lambda)
               .c_str());
  return c.finish();
}

bool criterion5() {
  Criterion c(5, "random sparse graphs: off-support coverage floors");
  ExperimentConfig cfg;
  cfg.model = Model::model2_like;
  cfg.p = 100;
  cfg.n = 400;
  cfg.replicates = 50;
  cfg.methods = {Method::node_sqrt, Method::node_sqrt_tau};
  cfg.seed = 1;

  const auto rows = precis::run_coverage_experiment(cfg).rows();
  c.expect(rows[0].coverage_s0c >= 90.0,
           strf("node-sqrt coverage S0c = %.2f >= 90", rows[0].coverage_s0c));
  c.expect(rows[1].coverage_s0c >= 93.0,
           strf("node-sqrt-tau coverage S0c = %.2f >= 93", rows[1].coverage_s0c));
  return c.finish();
}

bool criterion6() {
  Criterion c(6, "solver-oracle equivalence");
  oracles::TestRng rng(606);

  double worst_glasso = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Matrix s = oracles::random_spd(2, rng);
    GlassoConfig gcfg;
    gcfg.lambda = 0.05 + 0.35 * rng.uniform();
    gcfg.tol = 1e-9;
    const auto est =
        precis::solve_graphical_lasso(precis::covariance_from_population(s), gcfg);
    const Matrix closed = oracles::glasso_2x2_closed_form(s, gcfg.lambda);
    worst_glasso = std::max(worst_glasso, (est.theta - closed).cwiseAbs().maxCoeff());
    if (t < 3) {
      const Matrix slow = oracles::proximal_gradient_glasso(
          s, Matrix::Constant(2, 2, gcfg.lambda));
      worst_glasso = std::max(worst_glasso, (est.theta - slow).cwiseAbs().maxCoeff());
    }
  }
  c.expect(worst_glasso <= 1e-4,
           strf("p=2 graphical lasso vs closed form/slow solver: %.2e <= 1e-4",
                worst_glasso));

  double worst_lasso = 0.0;
  for (int t = 0; t < 10; ++t) {
    const int n = 25 + rng.below(30);
    const bool two_dim = t >= 5;
    const int q = two_dim ? 2 : 1;
    Matrix a = oracles::random_data(n, q, rng);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
      y(i) = 0.9 * a(i, 0) + 0.5 * rng.symmetric();
      if (two_dim) y(i) -= 0.6 * a(i, 1);
    }
    LassoProblem prob;
    prob.design = a;
    prob.response = y;
    prob.lambda = 0.03 + 0.2 * rng.uniform();

    for (int variant = 0; variant < 2; ++variant) {
      const bool sqrt_variant = variant == 1;
      const auto sol = sqrt_variant ? precis::solve_sqrt_lasso(prob)
                                    : precis::solve_lasso(prob);
      auto objective = [&](const Vector& b) {
        const double fit2 = (y - a * b).squaredNorm() / n;
        const double l1 = b.cwiseAbs().sum();
        return sqrt_variant ? std::sqrt(fit2) + prob.lambda * l1
                            : fit2 + 2.0 * prob.lambda * l1;
      };
      if (q == 1) {
        const double best = oracles::grid_minimize_1d(
            [&](double b) {
              Vector v(1);
              v << b;
              return objective(v);
            },
            -3.0, 3.0);
        worst_lasso = std::max(worst_lasso, std::abs(sol.coefficients(0) - best));
      } else {
        const auto [b0, b1] = oracles::grid_minimize_2d(
            [&](double x, double z) {
              Vector v(2);
              v << x, z;
              return objective(v);
            },
            -3.0, 3.0, -3.0, 3.0);
        worst_lasso = std::max(worst_lasso, std::abs(sol.coefficients(0) - b0));
        worst_lasso = std::max(worst_lasso, std::abs(sol.coefficients(1) - b1));
      }
    }
  }
  c.expect(worst_lasso <= 1e-4,
           strf("lasso/sqrt lasso vs grid search: %.2e <= 1e-4", worst_lasso));

  const auto theta0 = precis::make_model(Model::model1, 10);
  const auto data = precis::sample_gaussian(theta0, 500, 66);
  const auto cov = precis::sample_covariance(data);
  GlassoConfig tiny;
  tiny.lambda = 1e-8;
  const auto nearly = precis::solve_graphical_lasso(cov, tiny);
  const double dev = (nearly.theta - slow_inverse(cov.sigma_hat)).cwiseAbs().maxCoeff();
  c.expect(dev <= 1e-5,
           strf("vanishing penalty vs inverse covariance: %.2e <= 1e-5", dev));

  c.expect(c.elapsed() < 120.0, strf("runtime %.1f s < 120 s", c.elapsed()));
  return c.finish();
}

bool criterion7() {
  Criterion c(7, "stationarity certificates across a randomized sweep");
  oracles::TestRng rng(707);
  double worst = 0.0;
  int solved = 0;

  for (int t = 0; t < 200; ++t) {
    const int kind = t % 4;
    if (kind <= 1) {  // penalized regression, both variants
      const int n = 20 + rng.below(61);
      const int q = 1 + rng.below(10);
      Matrix a = oracles::random_data(n, q, rng);
      Vector y(n);
      for (int i = 0; i < n; ++i) {
        y(i) = 0.5 * rng.symmetric();
        for (int k = 0; k < q; k += 2) y(i) += 0.7 * a(i, k);
      }
      LassoProblem prob;
      prob.design = a;
      prob.response = y;
      const double pull = ((a.transpose() * y) / n).cwiseAbs().maxCoeff();
      prob.lambda = (0.05 + 0.5 * rng.uniform()) * pull;

      const bool sqrt_variant = kind == 1;
      const auto sol = sqrt_variant ? precis::solve_sqrt_lasso(prob)
                                    : precis::solve_lasso(prob);
      if (!sol.converged) continue;
      const auto report = precis::kkt_report(
          prob, sol,
          sqrt_variant ? precis::LassoVariant::sqrt : precis::LassoVariant::lasso);
      worst = std::max(worst, report.max_violation);
      ++solved;
    } else if (kind == 2) {  // graphical lasso
      const int p = 2 + rng.below(7);
      const Matrix s = oracles::random_spd(p, rng);
      double max_off = 0.0;
      for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) max_off = std::max(max_off, std::abs(s(i, j)));
      }
      GlassoConfig cfg;
      cfg.lambda = 0.02 + 0.5 * max_off * rng.uniform();
      const auto cov = precis::covariance_from_population(s);
      const auto est = precis::solve_graphical_lasso(cov, cfg);
      if (!est.converged) continue;
      worst = std::max(worst, precis::glasso_kkt_report(est, cov, cfg).max_violation);
      ++solved;
    } else {  // one nodewise column, checked as the regression it solves
      const int n = 30 + rng.below(71);
      const int p = 3 + rng.below(6);
      const Matrix x = oracles::random_data(n, p, rng);
      const DataMatrix data(x);
      const auto cov = precis::sample_covariance(data);
      const int j = rng.below(p);
      const double lambda = 0.01 + 0.3 * rng.uniform();
      const auto fit = precis::fit_node_column(
          data, j, lambda, precis::NodewiseRegressor::sqrt_lasso, cov);
      if (!fit.converged) continue;

      Matrix others(n, p - 1);
      for (int k = 0, col = 0; k < p; ++k) {
        if (k != j) others.col(col++) = x.col(k);
      }
      LassoProblem prob;
      prob.design = others;
      prob.response = x.col(j);
      prob.lambda = lambda;
      precis::LassoSolution as_solution;
      as_solution.coefficients = fit.gamma;
      const auto report =
          precis::kkt_report(prob, as_solution, precis::LassoVariant::sqrt);
      worst = std::max(worst, report.max_violation);
      ++solved;
    }
  }
  c.expect(solved == 200, strf("%d of 200 instances converged", solved));
  c.expect(worst <= 1e-6, strf("max violation %.2e <= 1e-6", worst));
  return c.finish();
}

bool criterion8() {
  Criterion c(8, "algebraic identities");

  const auto theta0 = precis::make_model(Model::model1, 10);
  const auto data = precis::sample_gaussian(theta0, 300, 88);
  const auto cov = precis::sample_covariance(data);
  GlassoConfig wcfg;
  wcfg.lambda = 0.1;
  wcfg.variant = GlassoConfig::Variant::weighted;
  wcfg.tol = 1e-9;
  const auto direct = precis::solve_graphical_lasso(cov, wcfg);
  GlassoConfig ncfg = wcfg;
  ncfg.variant = GlassoConfig::Variant::normalized;
  const auto rescaled = precis::weighted_from_normalized(
      precis::solve_graphical_lasso(cov, ncfg), cov);
  const double dev_scale = (rescaled.theta - direct.theta).cwiseAbs().maxCoeff();
  c.expect(dev_scale <= 1e-6,
           strf("normalized solve rescales to weighted solve: %.2e <= 1e-6", dev_scale));

  oracles::TestRng rng(808);
  const DataMatrix raw(oracles::random_data(100, 8, rng));
  const auto cov8 = precis::sample_covariance(raw);
  const auto mle = precis::mle_estimator(cov8);
  const auto deb = precis::debias(mle, cov8);
  const double dev_fix = (deb.t_hat - mle.theta).cwiseAbs().maxCoeff();
  c.expect(dev_fix <= 1e-10,
           strf("de-bias fixes the inverse covariance: %.2e <= 1e-10", dev_fix));

  double worst_round = 0.0;
  for (Model model : {Model::model1, Model::model3}) {
    const auto pop = precis::make_model(model, 50);
    std::vector<precis::NodewiseColumnFit> fits(50);
    for (int j = 0; j < 50; ++j) {
      auto [gamma0, tau0_sq] = precis::population_column(pop, j);
      fits[j].node = j;
      fits[j].gamma = gamma0;
      fits[j].tau_hat = std::sqrt(tau0_sq);
      fits[j].tau_tilde = fits[j].tau_hat;
    }
    const auto back = precis::assemble_precision(fits, precis::TauVariant::tau_hat,
                                                 precis::NodewiseRegressor::sqrt_lasso);
    worst_round = std::max(worst_round, (back.theta - pop.theta).cwiseAbs().maxCoeff());
  }
  c.expect(worst_round <= 1e-12,
           strf("population columns reassemble exactly: %.2e <= 1e-12", worst_round));
  return c.finish();
}

bool criterion9() {
  Criterion c(9, "linearization remainder shrinks with the sample size");
  const auto theta0 = precis::make_model(Model::model1, 20);
  const Matrix sigma0 = slow_inverse(theta0.theta);

  std::vector<double> medians;
  for (int n : {200, 800, 3200}) {
    std::vector<double> values;
    for (int seed = 0; seed < 20; ++seed) {
      const auto data = precis::sample_gaussian(theta0, n, 9000 + seed);
      const auto cov = precis::sample_covariance(data);
      const auto est = precis::fit_nodewise(data, universal(20, n),
                                            precis::NodewiseRegressor::sqrt_lasso,
                                            precis::TauVariant::tau_hat, cov);
      const auto deb = precis::debias(est.as_precision(), cov);
      const Matrix remainder = deb.t_hat - theta0.theta +
                               theta0.theta * (cov.sigma_hat - sigma0) * theta0.theta;
      values.push_back(std::sqrt(static_cast<double>(n)) *
                       remainder.cwiseAbs().maxCoeff());
    }
    std::sort(values.begin(), values.end());
    medians.push_back(0.5 * (values[9] + values[10]));
  }
  c.expect(medians[0] > medians[1] && medians[1] > medians[2],
           strf("medians %.3f > %.3f > %.3f across n = 200, 800, 3200", medians[0],
                medians[1], medians[2]));
  return c.finish();
}

bool criterion10() {
  Criterion c(10, "chain graph direction search and edge-weight intervals");
  precis::DagExperimentConfig cfg;
  cfg.model = precis::chain_dag(6, 1.0, 1.0);
  cfg.n = 2000;
  cfg.replicates = 100;
  cfg.alpha = 0.05;
  cfg.seed = 1;
  cfg.mode = precis::SearchMode::exhaustive;

  const auto result = precis::run_dag_experiment(cfg);
  c.expect(result.ordering_consistent >= 90,
           strf("ordering consistent in %d of 100 replicates (>= 90)",
                result.ordering_consistent));

  for (const auto& e : result.edges) {
    const double rate =
        100.0 * static_cast<double>(e.covered) / result.ordering_consistent;
    c.expect(rate >= 91.0 && rate <= 99.0,
             strf("edge %d->%d covered in %.1f%% of consistent replicates (91..99)",
                  e.parent + 1, e.child + 1, rate));
  }

  const auto& t = result.studentized;
  double mean = 0.0;
  for (double v : t) mean += v;
  mean /= t.size();
  double var = 0.0;
  for (double v : t) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / (t.size() - 1));
  c.expect(sd >= 0.85 && sd <= 1.15,
           strf("studentized statistics: sd = %.3f in [0.85, 1.15]", sd));

  c.expect(c.elapsed() < 300.0, strf("runtime %.0f s < 300 s", c.elapsed()));
  return c.finish();
}

bool criterion11() {
  Criterion c(11, "irrepresentability margins match a dense brute force");
  oracles::TestRng rng(1111);
  double worst = 0.0;

  for (int t = 0; t < 20; ++t) {
    const int p = 3 + t % 4;
    const Matrix theta = oracles::random_spd(p, rng, 1.0);
    std::vector<std::pair<int, int>> edges;
    Matrix shape = Matrix::Identity(p, p);
    for (int i = 0; i < p; ++i) {
      for (int j = i + 1; j < p; ++j) {
        if (rng.uniform() < 0.4) {
          edges.push_back({i, j});
          shape(i, j) = shape(j, i) = 1.0;
        }
      }
    }

    PrecisionEstimate est;
    est.theta = theta;
    est.provenance = precis::Provenance::population;
    const auto diag = precis::irrepresentability_check(
        est, precis::pattern_from_matrix(shape, 1e-12));
    const auto ref = oracles::irrepresentability_brute_force(slow_inverse(theta), edges);

    worst = std::max(worst, std::abs(diag.alpha_margin - ref.alpha_margin));
    worst = std::max(worst, std::abs(diag.kappa_H - ref.kappa_h));
    worst = std::max(worst, std::abs(diag.kappa_Sigma - ref.kappa_sigma));
  }
  c.expect(worst <= 1e-8, strf("max deviation %.2e <= 1e-8 over 20 instances", worst));
  return c.finish();
}

}  // namespace

int main(int argc, char** argv) {
  bool run[12] = {};
  if (argc <= 1) {
    for (int i = 1; i <= 11; ++i) run[i] = true;
  } else {
    for (int a = 1; a < argc; ++a) {
      const int id = std::atoi(argv[a]);
      if (id < 1 || id > 11) {
        std::fprintf(stderr, "usage: %s [criterion numbers in 1..11]\n", argv[0]);
        return 64;
      }
      run[id] = true;
    }
  }

  bool (*criteria[])() = {criterion1, criterion2, criterion3, criterion4,
                          criterion5, criterion6, criterion7, criterion8,
                          criterion9, criterion10, criterion11};
  int failures = 0;
  for (int id = 1; id <= 11; ++id) {
    if (!run[id]) continue;
    bool ok = false;
    try {
      ok = criteria[id - 1]();
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %d (exception: %s)\n", id, e.what());
    }
    if (!ok) ++failures;
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
