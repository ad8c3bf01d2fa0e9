// Micro-benchmarks for the solver and inference hot paths.

#include <benchmark/benchmark.h>

#include <cmath>

#include "precis/glasso.hpp"
#include "precis/inference.hpp"
#include "precis/lasso.hpp"
#include "precis/models.hpp"
#include "precis/nodewise.hpp"

namespace {

precis::DataMatrix bench_data(int p, int n) {
  return precis::sample_gaussian(precis::make_model(precis::Model::model1, p), n, 42);
}

precis::LassoProblem regression_problem(int p, int n) {
  const auto data = bench_data(p, n);
  precis::LassoProblem prob;
  prob.design = data.values().rightCols(p - 1);
  prob.response = data.values().col(0);
  prob.lambda = std::sqrt(std::log(static_cast<double>(p)) / n);
  return prob;
}

void bench_lasso_solve(benchmark::State& state) {
  const auto prob = regression_problem(50, 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(precis::solve_lasso(prob));
  }
}
BENCHMARK(bench_lasso_solve);

void bench_sqrt_lasso_solve(benchmark::State& state) {
  const auto prob = regression_problem(50, 200);
  for (auto _ : state) {
    benchmark::DoNotOptimize(precis::solve_sqrt_lasso(prob));
  }
}
BENCHMARK(bench_sqrt_lasso_solve);

void bench_glasso_p50(benchmark::State& state) {
  const auto cov = precis::sample_covariance(bench_data(50, 200));
  precis::GlassoConfig cfg;
  cfg.lambda = 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(precis::solve_graphical_lasso(cov, cfg));
  }
}
BENCHMARK(bench_glasso_p50);

void bench_nodewise_column_p100(benchmark::State& state) {
  const auto data = bench_data(100, 200);
  const auto cov = precis::sample_covariance(data);
  const double lambda = std::sqrt(std::log(100.0) / 200.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(precis::fit_node_column(
        data, 0, lambda, precis::NodewiseRegressor::sqrt_lasso, cov));
  }
}
BENCHMARK(bench_nodewise_column_p100);

void bench_debias_p100(benchmark::State& state) {
  const auto data = bench_data(100, 200);
  const auto cov = precis::sample_covariance(data);
  const double lambda = std::sqrt(std::log(100.0) / 200.0);
  const auto est = precis::fit_nodewise(data, lambda,
                                        precis::NodewiseRegressor::sqrt_lasso,
                                        precis::TauVariant::tau_hat, cov)
                       .as_precision();
  for (auto _ : state) {
    benchmark::DoNotOptimize(precis::debias_with_variance(est, cov));
  }
}
BENCHMARK(bench_debias_p100);

}  // namespace

BENCHMARK_MAIN();
