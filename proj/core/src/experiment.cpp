#include "precis/experiment.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>

#include "precis/csv.hpp"
#include "precis/inference.hpp"
#include "precis/nodewise.hpp"
#include "precis/parallel.hpp"
#include "precis/rng.hpp"
#include "precis/stats.hpp"

namespace precis {

namespace {

constexpr std::uint64_t kSaltData = 0xda7a;
constexpr std::uint64_t kSaltValidation = 0x5a1d;
constexpr std::uint64_t kSaltDagData = 0xdaf0;
constexpr std::uint64_t kSaltSearch = 0x5eed;

double universal_lambda(int p, int n) {
  return std::sqrt(std::log(static_cast<double>(p)) / n);
}

double validation_loss(const Matrix& theta, const Matrix& sigma_val) {
  Eigen::LLT<Matrix> chol(theta);
  if (chol.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Matrix& l = chol.matrixLLT();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += std::log(l(i, i));
  logdet *= 2.0;
  return sigma_val.cwiseProduct(theta).sum() - logdet;
}

struct GridPick {
  int index = -1;
  double lambda = 0.0;
  PrecisionEstimate est;
  std::vector<double> losses;
};

GridPick pick_lambda(const CovarianceEstimate& train, const CovarianceEstimate& val,
                     const std::vector<double>& grid, GlassoConfig::Variant variant) {
  if (grid.empty()) throw ValidationError("lambda selection: empty grid");
  GridPick pick;
  pick.losses.reserve(grid.size());
  double best_loss = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < grid.size(); ++i) {
    const double lambda = grid[i];
    if (!(lambda >= 0.0)) throw ValidationError("lambda selection: negative grid value");
    double loss = std::numeric_limits<double>::infinity();
    std::optional<PrecisionEstimate> est;
    try {
      GlassoConfig cfg;
      cfg.lambda = lambda;
      cfg.variant = variant;
      est = solve_graphical_lasso(train, cfg);
      loss = validation_loss(est->theta, val.sigma_hat);
    } catch (const Error&) {
      // recorded as an infinite loss
    }
    pick.losses.push_back(loss);
    const bool better =
        loss < best_loss || (loss == best_loss && pick.index >= 0 && lambda < pick.lambda);
    if (est && better) {
      best_loss = loss;
      pick.index = static_cast<int>(i);
      pick.lambda = lambda;
      pick.est = std::move(*est);
    }
  }
  if (pick.index < 0 || !std::isfinite(best_loss)) {
    throw AllFitsFailed("lambda selection: no grid point produced a usable fit");
  }
  return pick;
}

struct EntrySplit {
  std::vector<char> in_s0;  // row-major p*p
  long s0_count = 0;
  long s0c_count = 0;
};

EntrySplit split_entries(const Matrix& theta0) {
  const int p = static_cast<int>(theta0.rows());
  EntrySplit split;
  split.in_s0.assign(static_cast<size_t>(p) * p, 0);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const bool active = i == j || theta0(i, j) != 0.0;
      split.in_s0[static_cast<size_t>(i) * p + j] = active ? 1 : 0;
      (active ? split.s0_count : split.s0c_count) += 1;
    }
  }
  return split;
}

void accumulate_intervals(MethodOutcome& out, const ConfidenceGrid& ci,
                          const Matrix& theta0, const EntrySplit& split) {
  const int p = static_cast<int>(theta0.rows());
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      const double lo = ci.lower(i, j);
      const double hi = ci.upper(i, j);
      const double covered = (lo <= theta0(i, j) && theta0(i, j) <= hi) ? 1.0 : 0.0;
      const double len = hi - lo;
      if (split.in_s0[static_cast<size_t>(i) * p + j]) {
        out.cover_s0 += covered;
        out.length_s0 += len;
      } else {
        out.cover_s0c += covered;
        out.length_s0c += len;
      }
    }
  }
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.replicates < 1) throw ValidationError("experiment: replicates must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw InvalidAlpha("experiment: alpha must lie strictly between 0 and 1");
  }
  if (cfg.methods.empty()) throw ValidationError("experiment: no methods requested");
  if (cfg.model == Model::custom_dag) {
    throw ValidationError("experiment: coverage tables cover undirected models");
  }
  if (cfg.grid_points < 1) throw ValidationError("experiment: grid_points must be at least 1");
  if (cfg.replicate_offset < 0) {
    throw ValidationError("experiment: replicate_offset must be nonnegative");
  }
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::glasso: return "glasso";
    case Method::glasso_weigh: return "glasso-weigh";
    case Method::node_sqrt: return "node-sqrt";
    case Method::node_sqrt_tau: return "node-sqrt-tau";
    case Method::node: return "node";
    case Method::mle: return "MLE";
    case Method::oracle: return "oracle";
    case Method::perfect: return "perfect";
  }
  throw ValidationError("unknown method enum value");
}

Method method_from_name(const std::string& name) {
  if (name == "glasso") return Method::glasso;
  if (name == "glasso-weigh") return Method::glasso_weigh;
  if (name == "node-sqrt") return Method::node_sqrt;
  if (name == "node-sqrt-tau") return Method::node_sqrt_tau;
  if (name == "node") return Method::node;
  if (name == "MLE" || name == "mle") return Method::mle;
  if (name == "oracle") return Method::oracle;
  if (name == "perfect") return Method::perfect;
  throw ParseError("unknown method name: " + name);
}

std::vector<double> default_lambda_grid(int p, int n, int points) {
  if (points < 1) throw ValidationError("lambda grid needs at least one point");
  const double u = universal_lambda(p, n);
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = u;
    return grid;
  }
  const double lo = std::log(0.01 * u);
  const double hi = std::log(10.0 * u);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * i / (points - 1));
  }
  return grid;
}

LambdaSelection select_lambda_validation(const DataMatrix& train,
                                         const DataMatrix& validation,
                                         const std::vector<double>& grid,
                                         GlassoConfig::Variant variant) {
  const auto train_cov = sample_covariance(train);
  const auto val_cov = sample_covariance(validation);
  auto pick = pick_lambda(train_cov, val_cov, grid, variant);
  LambdaSelection out;
  out.lambda = pick.lambda;
  out.losses = std::move(pick.losses);
  return out;
}

CoverageTable run_coverage_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);

  const PrecisionEstimate theta0 = make_model(cfg.model, cfg.p, cfg.model_seed);
  const EntrySplit split = split_entries(theta0.theta);
  const double lambda_uni = universal_lambda(cfg.p, cfg.n);
  const int method_count = static_cast<int>(cfg.methods.size());

  bool wants_validation = false;
  bool wants_perfect = false;
  for (Method m : cfg.methods) {
    if ((m == Method::glasso || m == Method::glasso_weigh) &&
        cfg.lambda_policy == LambdaPolicy::validation_grid) {
      wants_validation = true;
    }
    if (m == Method::perfect) wants_perfect = true;
  }
  const std::vector<double> grid =
      wants_validation ? default_lambda_grid(cfg.p, cfg.n, cfg.grid_points)
                       : std::vector<double>{};

  MethodOutcome perfect_outcome;
  if (wants_perfect) {
    const auto ref = perfect_reference(theta0, cfg.n, cfg.alpha);
    const int p = cfg.p;
    perfect_outcome.cover_s0 = (1.0 - cfg.alpha) * split.s0_count;
    perfect_outcome.cover_s0c = (1.0 - cfg.alpha) * split.s0c_count;
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        (split.in_s0[static_cast<size_t>(i) * p + j] ? perfect_outcome.length_s0
                                                     : perfect_outcome.length_s0c) +=
            ref.lengths(i, j);
      }
    }
  }

  CoverageTable table;
  table.methods = cfg.methods;
  table.s0_count = split.s0_count;
  table.s0c_count = split.s0c_count;
  table.p = cfg.p;
  table.n = cfg.n;
  table.alpha = cfg.alpha;
  table.records.resize(cfg.replicates);

  const SparsityPattern true_pattern = pattern_from_matrix(theta0.theta, 0.0);

  parallel_for(cfg.replicates, [&](int r) {
    const int rep = cfg.replicate_offset + r;
    ReplicateRecord rec;
    rec.replicate = rep;
    rec.outcomes.resize(method_count);

    const DataMatrix data =
        sample_gaussian(theta0, cfg.n, mix_seed(cfg.seed, rep, kSaltData));
    const CovarianceEstimate cov = sample_covariance(data);

    std::optional<CovarianceEstimate> val_cov;
    if (wants_validation) {
      const DataMatrix val =
          sample_gaussian(theta0, cfg.n, mix_seed(cfg.seed, rep, kSaltValidation));
      val_cov = sample_covariance(val);
    }

    // square-root fits are shared between the tau variants
    std::optional<NodewiseEstimate> sqrt_fit;
    bool sqrt_failed = false;
    auto ensure_sqrt = [&]() -> const NodewiseEstimate& {
      if (sqrt_failed) throw NotConverged("nodewise square-root fit failed earlier");
      if (!sqrt_fit) {
        try {
          sqrt_fit = fit_nodewise(data, lambda_uni, NodewiseRegressor::sqrt_lasso,
                                  TauVariant::tau_hat, cov);
        } catch (const Error&) {
          sqrt_failed = true;
          throw;
        }
      }
      return *sqrt_fit;
    };

    for (int mi = 0; mi < method_count; ++mi) {
      MethodOutcome& out = rec.outcomes[mi];
      try {
        switch (cfg.methods[mi]) {
          case Method::glasso:
          case Method::glasso_weigh: {
            const auto variant = cfg.methods[mi] == Method::glasso
                                     ? GlassoConfig::Variant::plain
                                     : GlassoConfig::Variant::weighted;
            PrecisionEstimate est;
            if (cfg.lambda_policy == LambdaPolicy::validation_grid) {
              auto pick = pick_lambda(cov, *val_cov, grid, variant);
              est = std::move(pick.est);
              out.lambda_used = pick.lambda;
            } else {
              GlassoConfig gcfg;
              gcfg.lambda = lambda_uni;
              gcfg.variant = variant;
              est = solve_graphical_lasso(cov, gcfg);
              out.lambda_used = lambda_uni;
            }
            const auto deb = debias_with_variance(est, cov);
            accumulate_intervals(out, confidence_intervals(deb, cfg.alpha), theta0.theta,
                                 split);
            break;
          }
          case Method::node_sqrt:
          case Method::node_sqrt_tau: {
            const auto& base = ensure_sqrt();
            const auto variant = cfg.methods[mi] == Method::node_sqrt
                                     ? TauVariant::tau_hat
                                     : TauVariant::tau_tilde;
            const auto est =
                assemble_precision(base.fits, variant, NodewiseRegressor::sqrt_lasso)
                    .as_precision();
            out.lambda_used = lambda_uni;
            const auto deb = debias_with_variance(est, cov);
            accumulate_intervals(out, confidence_intervals(deb, cfg.alpha), theta0.theta,
                                 split);
            break;
          }
          case Method::node: {
            const auto est = fit_nodewise(data, lambda_uni, NodewiseRegressor::lasso,
                                          TauVariant::tau_hat, cov)
                                 .as_precision();
            out.lambda_used = lambda_uni;
            const auto deb = debias_with_variance(est, cov);
            accumulate_intervals(out, confidence_intervals(deb, cfg.alpha), theta0.theta,
                                 split);
            break;
          }
          case Method::mle:
          case Method::oracle: {
            // debias is an exact no-op for the unrestricted MLE and restores the
            // efficient entrywise variance for the pattern-constrained one
            const PrecisionEstimate est = cfg.methods[mi] == Method::mle
                                              ? mle_estimator(cov)
                                              : oracle_mle(cov, true_pattern);
            out.lambda_used = 0.0;
            const auto deb = debias_with_variance(est, cov);
            accumulate_intervals(out, confidence_intervals(deb, cfg.alpha), theta0.theta,
                                 split);
            break;
          }
          case Method::perfect:
            out = perfect_outcome;
            break;
        }
      } catch (const Error&) {
        out = MethodOutcome{};
        out.failed = true;
      }
    }
    table.records[r] = std::move(rec);
  });

  for (int mi = 0; mi < method_count; ++mi) {
    int fails = 0;
    for (const auto& rec : table.records) fails += rec.outcomes[mi].failed ? 1 : 0;
    if (fails > 0.05 * cfg.replicates) {
      throw NotConverged("experiment: method " + method_name(cfg.methods[mi]) +
                         " failed in " + std::to_string(fails) + " of " +
                         std::to_string(cfg.replicates) + " replicates");
    }
  }
  return table;
}

std::vector<CoverageRow> CoverageTable::rows() const {
  std::vector<CoverageRow> out;
  out.reserve(methods.size());
  for (size_t mi = 0; mi < methods.size(); ++mi) {
    CoverageRow row;
    row.method = method_name(methods[mi]);
    double cs0 = 0.0, cs0c = 0.0, ls0 = 0.0, ls0c = 0.0, lam = 0.0;
    long valid = 0;
    for (const auto& rec : records) {
      const auto& o = rec.outcomes[mi];
      if (o.failed) {
        ++row.failures;
        continue;
      }
      ++valid;
      cs0 += o.cover_s0;
      cs0c += o.cover_s0c;
      ls0 += o.length_s0;
      ls0c += o.length_s0c;
      lam += o.lambda_used;
    }
    const double denom_s0 = static_cast<double>(valid) * s0_count;
    const double denom_s0c = static_cast<double>(valid) * s0c_count;
    row.coverage_s0 = 100.0 * cs0 / denom_s0;
    row.coverage_s0c = 100.0 * cs0c / denom_s0c;
    row.length_s0 = ls0 / denom_s0;
    row.length_s0c = ls0c / denom_s0c;
    row.avg_lambda = valid > 0 ? lam / valid : std::numeric_limits<double>::quiet_NaN();
    out.push_back(std::move(row));
  }
  return out;
}

std::string CoverageTable::to_csv(int digits) const {
  auto fmt = [digits](double v) {
    if (digits < 0) return format_double(v);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return std::string(buf);
  };
  std::string out = "method,coverage_S0,coverage_S0c,length_S0,length_S0c,avg_lambda,failures\n";
  for (const auto& row : rows()) {
    out += row.method;
    out += ',';
    out += fmt(row.coverage_s0);
    out += ',';
    out += fmt(row.coverage_s0c);
    out += ',';
    out += fmt(row.length_s0);
    out += ',';
    out += fmt(row.length_s0c);
    out += ',';
    out += fmt(row.avg_lambda);
    out += ',';
    out += std::to_string(row.failures);
    out += '\n';
  }
  return out;
}

CoverageTable merge_tables(const CoverageTable& a, const CoverageTable& b) {
  if (a.methods != b.methods || a.p != b.p || a.n != b.n || a.alpha != b.alpha ||
      a.s0_count != b.s0_count || a.s0c_count != b.s0c_count) {
    throw ValidationError("merge: tables come from different configurations");
  }
  CoverageTable out = a;
  out.records.insert(out.records.end(), b.records.begin(), b.records.end());
  return out;
}

DagExperimentResult run_dag_experiment(const DagExperimentConfig& cfg) {
  validate_dag(cfg.model);
  if (cfg.replicates < 1) throw ValidationError("dag experiment: replicates must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw InvalidAlpha("dag experiment: alpha must lie strictly between 0 and 1");
  }

  const int p = cfg.model.p();
  PrecisionEstimate theta0;
  theta0.theta = cfg.model.theta0();
  theta0.provenance = Provenance::population;

  std::vector<std::pair<int, int>> true_edges;
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) {
      if (cfg.model.b(k, j) != 0.0) true_edges.emplace_back(k, j);
    }
  }
  const double z = two_sided_z(cfg.alpha);
  const double sqrt_n = std::sqrt(static_cast<double>(cfg.n));

  struct RepResult {
    bool consistent = false;
    std::vector<char> covered;
    std::vector<double> stats;
  };
  std::vector<RepResult> reps(cfg.replicates);

  parallel_for(cfg.replicates, [&](int r) {
    RepResult res;
    const DataMatrix data =
        sample_gaussian(theta0, cfg.n, mix_seed(cfg.seed, r, kSaltDagData));
    DagFitOptions opts;
    opts.lambda = cfg.lambda;
    opts.mode = cfg.mode;
    opts.seed = mix_seed(cfg.seed, r, kSaltSearch);
    const DagFit fit = fit_dag(data, opts);

    std::vector<int> position(p, 0);
    for (int pos = 0; pos < p; ++pos) position[fit.ordering_hat[pos]] = pos;
    res.consistent = true;
    for (const auto& [k, j] : true_edges) {
      if (position[k] >= position[j]) {
        res.consistent = false;
        break;
      }
    }
    if (res.consistent) {
      res.covered.reserve(true_edges.size());
      res.stats.reserve(true_edges.size());
      for (const auto& [k, j] : true_edges) {
        const auto& col = fit.columns[j];
        const auto it = std::find(col.predecessors.begin(), col.predecessors.end(), k);
        const int idx = static_cast<int>(it - col.predecessors.begin());
        const double se = col.sigma(idx) / sqrt_n;
        const double stat = (col.b_debiased(idx) - cfg.model.b(k, j)) / se;
        res.stats.push_back(stat);
        res.covered.push_back(std::abs(stat) <= z ? 1 : 0);
      }
    }
    reps[r] = std::move(res);
  });

  DagExperimentResult out;
  out.replicates = cfg.replicates;
  out.edges.reserve(true_edges.size());
  for (const auto& [k, j] : true_edges) {
    DagEdgeSummary e;
    e.parent = k;
    e.child = j;
    out.edges.push_back(e);
  }
  for (const auto& res : reps) {
    if (!res.consistent) continue;
    ++out.ordering_consistent;
    for (size_t e = 0; e < true_edges.size(); ++e) {
      out.edges[e].covered += res.covered[e];
      out.studentized.push_back(res.stats[e]);
    }
  }
  return out;
}

}  // namespace precis
