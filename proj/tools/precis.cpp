#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "precis/csv.hpp"
#include "precis/dag.hpp"
#include "precis/experiment.hpp"
#include "precis/glasso.hpp"
#include "precis/inference.hpp"
#include "precis/models.hpp"
#include "precis/nodewise.hpp"
#include "precis/stats.hpp"

namespace {

using namespace precis;

std::string fmt(double v, int digits) {
  if (digits < 0) return format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void emit(const std::string& output_path, const std::string& text) {
  if (output_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output_path);
  if (!out) throw ValidationError("cannot open output file: " + output_path);
  out << text;
  if (!out.flush()) throw ValidationError("failed writing output file: " + output_path);
}

std::string matrix_csv(const Matrix& m, int digits) {
  std::string text;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) text += ',';
      text += fmt(m(i, j), digits);
    }
    text += '\n';
  }
  return text;
}

DataMatrix load_data(const std::string& path) {
  const CsvTable table = read_csv(path);
  return DataMatrix(table.values);
}

struct EstimateOpts {
  std::string input;
  std::string output;
  std::string method = "node-sqrt";
  double lambda = std::numeric_limits<double>::quiet_NaN();
  double alpha = 0.05;
  bool center = false;
  int digits = -1;
};

bool is_correlation_target(const std::string& method) { return method == "glasso-norm"; }

PrecisionEstimate run_method(const std::string& method, const DataMatrix& data,
                             const CovarianceEstimate& cov, double lambda) {
  if (std::isnan(lambda)) {
    lambda = std::sqrt(std::log(static_cast<double>(data.p())) / data.n());
  }
  if (method == "glasso" || method == "glasso-weigh" || method == "glasso-norm") {
    GlassoConfig cfg;
    cfg.lambda = lambda;
    cfg.variant = method == "glasso"         ? GlassoConfig::Variant::plain
                  : method == "glasso-weigh" ? GlassoConfig::Variant::weighted
                                             : GlassoConfig::Variant::normalized;
    return solve_graphical_lasso(cov, cfg);
  }
  if (method == "node-sqrt" || method == "node-sqrt-tau") {
    const auto variant =
        method == "node-sqrt" ? TauVariant::tau_hat : TauVariant::tau_tilde;
    return fit_nodewise(data, lambda, NodewiseRegressor::sqrt_lasso, variant, cov)
        .as_precision();
  }
  if (method == "node") {
    return fit_nodewise(data, lambda, NodewiseRegressor::lasso, TauVariant::tau_hat, cov)
        .as_precision();
  }
  if (method == "mle" || method == "MLE") return mle_estimator(cov);
  throw ValidationError("unknown method: " + method +
                        " (expected glasso, glasso-weigh, glasso-norm, node-sqrt, "
                        "node-sqrt-tau, node, or mle)");
}

int run_estimate(const EstimateOpts& o, bool debiased) {
  const DataMatrix data = load_data(o.input);
  const CovarianceEstimate cov = sample_covariance(data, o.center);
  const PrecisionEstimate est = run_method(o.method, data, cov, o.lambda);
  if (!debiased) {
    emit(o.output, matrix_csv(est.theta, o.digits));
    return 0;
  }
  const DebiasedEstimate deb = debias(est, cov, is_correlation_target(o.method));
  emit(o.output, matrix_csv(deb.t_hat, o.digits));
  return 0;
}

int run_ci(const EstimateOpts& o) {
  const DataMatrix data = load_data(o.input);
  const CovarianceEstimate cov = sample_covariance(data, o.center);
  const PrecisionEstimate est = run_method(o.method, data, cov, o.lambda);
  const DebiasedEstimate deb =
      debias_with_variance(est, cov, is_correlation_target(o.method));
  const ConfidenceGrid ci = confidence_intervals(deb, o.alpha);

  std::string text = "i,j,estimate,lower,upper,sigma_hat\n";
  const int p = deb.p();
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      text += std::to_string(i + 1);
      text += ',';
      text += std::to_string(j + 1);
      text += ',';
      text += fmt(deb.t_hat(i, j), o.digits);
      text += ',';
      text += fmt(ci.lower(i, j), o.digits);
      text += ',';
      text += fmt(ci.upper(i, j), o.digits);
      text += ',';
      text += fmt(deb.sigma_hat(i, j), o.digits);
      text += '\n';
    }
  }
  emit(o.output, text);
  return 0;
}

struct DagOpts {
  std::string input;
  std::string output;
  std::string mode = "exhaustive";
  std::string known_ordering;
  double lambda = -1.0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int digits = -1;
};

std::vector<int> parse_ordering(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    size_t pos = 0;
    int v;
    try {
      v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
      throw ParseError("known-ordering: cannot parse node index '" + tok + "'");
    }
    while (pos < tok.size() && std::isspace(static_cast<unsigned char>(tok[pos]))) ++pos;
    if (pos != tok.size()) {
      throw ParseError("known-ordering: cannot parse node index '" + tok + "'");
    }
    out.push_back(v - 1);  // 1-based on the command line
  }
  if (out.empty()) throw ParseError("known-ordering: empty list");
  return out;
}

int run_dag(const DagOpts& o) {
  const DataMatrix data = load_data(o.input);
  DagFitOptions opts;
  opts.lambda = o.lambda;
  opts.seed = o.seed;
  if (o.mode == "exhaustive") {
    opts.mode = SearchMode::exhaustive;
  } else if (o.mode == "greedy") {
    opts.mode = SearchMode::greedy;
  } else {
    throw ValidationError("mode must be exhaustive or greedy");
  }
  std::vector<int> known;
  if (!o.known_ordering.empty()) {
    known = parse_ordering(o.known_ordering);
    opts.known_ordering = &known;
  }
  const DagFit fit = fit_dag(data, opts);
  const double z = two_sided_z(o.alpha);
  const double sqrt_n = std::sqrt(static_cast<double>(data.n()));

  std::string text = "k,j,beta_hat,b_debiased,lower,upper\n";
  for (int j : fit.ordering_hat) {
    const auto& col = fit.columns[j];
    for (size_t a = 0; a < col.predecessors.size(); ++a) {
      const double half = z * col.sigma(a) / sqrt_n;
      text += std::to_string(col.predecessors[a] + 1);
      text += ',';
      text += std::to_string(j + 1);
      text += ',';
      text += fmt(col.beta_hat(a), o.digits);
      text += ',';
      text += fmt(col.b_debiased(a), o.digits);
      text += ',';
      text += fmt(col.b_debiased(a) - half, o.digits);
      text += ',';
      text += fmt(col.b_debiased(a) + half, o.digits);
      text += '\n';
    }
  }
  emit(o.output, text);
  return 0;
}

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

Model model_from_name(const std::string& name) {
  if (name == "model1") return Model::model1;
  if (name == "model2_like") return Model::model2_like;
  if (name == "model3") return Model::model3;
  throw ParseError("unknown model: " + name + " (expected model1, model2_like, model3)");
}

LambdaPolicy policy_from_name(const std::string& name) {
  if (name == "universal") return LambdaPolicy::universal;
  if (name == "validation_grid" || name == "validation") return LambdaPolicy::validation_grid;
  throw ParseError("unknown lambda_policy: " + name);
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const unsigned long long v = std::stoull(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing junk");
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ParseError("config: cannot parse " + key + " value '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const int v = std::stoi(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ParseError("config: cannot parse " + key + " value '" + s + "'");
  }
}

double parse_num(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const double v = std::stod(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ParseError("config: cannot parse " + key + " value '" + s + "'");
  }
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "model") {
    cfg.model = model_from_name(value);
  } else if (key == "p") {
    cfg.p = parse_int(value, key);
  } else if (key == "n") {
    cfg.n = parse_int(value, key);
  } else if (key == "replicates") {
    cfg.replicates = parse_int(value, key);
  } else if (key == "alpha") {
    cfg.alpha = parse_num(value, key);
  } else if (key == "methods") {
    cfg.methods.clear();
    for (const auto& name : split_commas(value)) cfg.methods.push_back(method_from_name(name));
  } else if (key == "seed") {
    cfg.seed = parse_u64(value, key);
  } else if (key == "lambda_policy") {
    cfg.lambda_policy = policy_from_name(value);
  } else if (key == "grid_points") {
    cfg.grid_points = parse_int(value, key);
  } else if (key == "replicate_offset") {
    cfg.replicate_offset = parse_int(value, key);
  } else if (key == "model_seed") {
    cfg.model_seed = parse_u64(value, key);
  } else {
    throw ParseError("config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  ExperimentConfig cfg;
  const std::string body = trim(text);
  if (!body.empty() && body[0] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("config: invalid JSON: ") + e.what());
    }
    for (const auto& [key, val] : j.items()) {
      if (key == "methods" && val.is_array()) {
        cfg.methods.clear();
        for (const auto& name : val) {
          cfg.methods.push_back(method_from_name(name.get<std::string>()));
        }
      } else if (val.is_string()) {
        apply_config_entry(cfg, key, val.get<std::string>());
      } else {
        apply_config_entry(cfg, key, val.dump());
      }
    }
  } else {
    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError("config: expected key=value, got '" + line + "'");
      }
      apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
  }
  if (cfg.methods.empty()) throw ParseError("config: no methods listed");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse precision matrices: estimation, de-biased confidence "
               "intervals, DAG edge inference, and coverage simulations"};
  app.require_subcommand(1);

  EstimateOpts est_opts, deb_opts, ci_opts;
  auto add_estimate_flags = [](CLI::App* cmd, EstimateOpts& o) {
    cmd->add_option("--input", o.input, "input data CSV (rows are observations)")
        ->required();
    cmd->add_option("--output", o.output, "output path (default: stdout)");
    cmd->add_option("--method", o.method,
                    "glasso | glasso-weigh | glasso-norm | node-sqrt | node-sqrt-tau | "
                    "node | mle");
    cmd->add_option("--lambda", o.lambda, "penalty level (default sqrt(log p / n))");
    cmd->add_flag("--center", o.center, "subtract column means first");
    cmd->add_option("--digits", o.digits,
                    "fixed decimal places (default: 17 significant digits)");
  };

  auto* cmd_estimate = app.add_subcommand("estimate", "fit a precision-matrix estimate");
  add_estimate_flags(cmd_estimate, est_opts);
  auto* cmd_debias = app.add_subcommand("debias", "fit, then de-bias the estimate");
  add_estimate_flags(cmd_debias, deb_opts);
  auto* cmd_ci = app.add_subcommand("ci", "entrywise confidence intervals");
  add_estimate_flags(cmd_ci, ci_opts);
  cmd_ci->add_option("--alpha", ci_opts.alpha, "two-sided level (default 0.05)");

  DagOpts dag_opts;
  auto* cmd_dag = app.add_subcommand("dag", "fit a Gaussian DAG and de-bias edge weights");
  cmd_dag->add_option("--input", dag_opts.input, "input data CSV")->required();
  cmd_dag->add_option("--output", dag_opts.output, "output path (default: stdout)");
  cmd_dag->add_option("--lambda", dag_opts.lambda,
                      "ordering-score penalty (default sqrt(log p / n))");
  cmd_dag->add_option("--alpha", dag_opts.alpha, "two-sided level (default 0.05)");
  cmd_dag->add_option("--mode", dag_opts.mode, "exhaustive | greedy");
  cmd_dag->add_option("--seed", dag_opts.seed, "random-restart seed for greedy search");
  cmd_dag->add_option("--known-ordering", dag_opts.known_ordering,
                      "comma-separated 1-based node order, skips the search");
  cmd_dag->add_option("--digits", dag_opts.digits,
                      "fixed decimal places (default: 17 significant digits)");

  std::string sim_config, sim_output;
  int sim_digits = -1;
  std::uint64_t sim_seed = 0;
  auto* cmd_sim = app.add_subcommand("simulate", "run a coverage experiment");
  cmd_sim->add_option("--config", sim_config, "experiment config (JSON or key=value)")
      ->required();
  cmd_sim->add_option("--output", sim_output, "output path (default: stdout)");
  auto* sim_seed_opt = cmd_sim->add_option("--seed", sim_seed, "override the config seed");
  cmd_sim->add_option("--digits", sim_digits,
                      "fixed decimal places (default: 17 significant digits)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_estimate->parsed()) return run_estimate(est_opts, false);
    if (cmd_debias->parsed()) return run_estimate(deb_opts, true);
    if (cmd_ci->parsed()) return run_ci(ci_opts);
    if (cmd_dag->parsed()) return run_dag(dag_opts);
    if (cmd_sim->parsed()) {
      ExperimentConfig cfg = parse_config(sim_config);
      if (sim_seed_opt->count() > 0) cfg.seed = sim_seed;
      const CoverageTable table = run_coverage_experiment(cfg);
      emit(sim_output, table.to_csv(sim_digits));
      return 0;
    }
  } catch (const precis::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_class();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
