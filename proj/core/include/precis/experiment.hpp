#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "precis/glasso.hpp"
#include "precis/models.hpp"

namespace precis {

enum class Method {
  glasso,
  glasso_weigh,
  node_sqrt,
  node_sqrt_tau,
  node,
  mle,
  oracle,
  perfect,
};

std::string method_name(Method m);
Method method_from_name(const std::string& name);

enum class LambdaPolicy { universal, validation_grid };

struct ExperimentConfig {
  Model model = Model::model1;
  int p = 100;
  int n = 200;
  int replicates = 100;
  double alpha = 0.05;
  std::vector<Method> methods;
  std::uint64_t seed = 1;
  LambdaPolicy lambda_policy = LambdaPolicy::universal;
  int grid_points = 20;      // validation grid resolution
  int replicate_offset = 0;  // global index of the first replicate, for split runs
  std::uint64_t model_seed = 0;  // graph seed for model2_like, fixed across replicates
};

// Sums of per-entry coverage indicators and interval lengths for one method on
// one replicate, split by the active set S0 (support plus diagonal) and its
// complement, over ordered index pairs.
struct MethodOutcome {
  bool failed = false;
  double cover_s0 = 0.0;
  double cover_s0c = 0.0;
  double length_s0 = 0.0;
  double length_s0c = 0.0;
  double lambda_used = 0.0;
};

struct ReplicateRecord {
  int replicate = 0;
  std::vector<MethodOutcome> outcomes;  // parallel to CoverageTable::methods
};

struct CoverageRow {
  std::string method;
  double coverage_s0 = 0.0;  // percent
  double coverage_s0c = 0.0;
  double length_s0 = 0.0;
  double length_s0c = 0.0;
  double avg_lambda = 0.0;
  int failures = 0;
};

struct CoverageTable {
  std::vector<Method> methods;
  std::vector<ReplicateRecord> records;  // one per replicate, in replicate order
  long s0_count = 0;   // ordered pairs in S0
  long s0c_count = 0;  // ordered pairs outside
  int p = 0;
  int n = 0;
  double alpha = 0.0;

  // Means over the non-failed replicates; empty complements yield NaN columns.
  std::vector<CoverageRow> rows() const;
  // digits < 0 emits full 17-significant-digit values.
  std::string to_csv(int digits = -1) const;
};

// Tables over disjoint replicate ranges of the same configuration concatenate
// exactly: summarizing the merge equals summarizing a single long run.
CoverageTable merge_tables(const CoverageTable& a, const CoverageTable& b);

CoverageTable run_coverage_experiment(const ExperimentConfig& cfg);

std::vector<double> default_lambda_grid(int p, int n, int points);

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> losses;  // validation negative log-likelihoods, grid order
};

// Fits the graphical lasso per grid point on the training data and picks the
// lambda minimizing tr(Sigma_val Theta) - log det Theta; ties go to the
// smaller lambda. Failed fits get +inf loss.
LambdaSelection select_lambda_validation(const DataMatrix& train,
                                         const DataMatrix& validation,
                                         const std::vector<double>& grid,
                                         GlassoConfig::Variant variant);

struct DagExperimentConfig {
  DagModel model;
  int n = 2000;
  int replicates = 100;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  SearchMode mode = SearchMode::exhaustive;
  double lambda = -1.0;  // < 0 means sqrt(log p / n)
};

struct DagEdgeSummary {
  int parent = 0;
  int child = 0;
  long covered = 0;  // over order-consistent replicates
};

struct DagExperimentResult {
  int replicates = 0;
  int ordering_consistent = 0;  // estimated ordering places every parent first
  std::vector<DagEdgeSummary> edges;
  std::vector<double> studentized;  // sqrt(n) (b_hat - b0) / sigma_hat, pooled
};

DagExperimentResult run_dag_experiment(const DagExperimentConfig& cfg);

}  // namespace precis
