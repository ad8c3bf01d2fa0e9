#include "precis/dag.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "precis/lasso.hpp"
#include "precis/parallel.hpp"
#include "precis/rng.hpp"

namespace precis {

namespace {

constexpr int kMaxDagNodes = 62;       // node sets are held in 64-bit masks
constexpr int kExhaustiveSubsetCap = 10;
constexpr double kMaxParentsAlpha = 0.5;

std::vector<int> mask_indices(std::uint64_t mask) {
  std::vector<int> idx;
  while (mask) {
    const int k = std::countr_zero(mask);
    idx.push_back(k);
    mask &= mask - 1;
  }
  return idx;
}

// RSS(j, A)/n = Sigma_jj - Sigma_jA (Sigma_AA)^-1 Sigma_Aj, memoized per
// (response, regressor-set); the value does not depend on any ordering.
class RssCache {
 public:
  RssCache(const Matrix& sigma) : sigma_(sigma), p_(static_cast<int>(sigma.rows())) {
    const bool dense = p_ <= 16;
    if (dense) {
      dense_.assign(p_, std::vector<double>(static_cast<size_t>(1) << p_,
                                            std::numeric_limits<double>::quiet_NaN()));
    } else {
      maps_.resize(p_);
    }
  }

  double rss(int j, std::uint64_t mask) {
    if (!dense_.empty()) {
      double& slot = dense_[j][mask];
      if (std::isnan(slot)) slot = compute(j, mask);
      return slot;
    }
    auto& m = maps_[j];
    auto it = m.find(mask);
    if (it != m.end()) return it->second;
    const double v = compute(j, mask);
    m.emplace(mask, v);
    return v;
  }

  Vector ols(int j, std::uint64_t mask) const {
    const auto idx = mask_indices(mask);
    const int q = static_cast<int>(idx.size());
    if (q == 0) return Vector();
    Matrix saa(q, q);
    Vector saj(q);
    for (int a = 0; a < q; ++a) {
      for (int b = 0; b < q; ++b) saa(a, b) = sigma_(idx[a], idx[b]);
      saj(a) = sigma_(idx[a], j);
    }
    return saa.ldlt().solve(saj);
  }

 private:
  double compute(int j, std::uint64_t mask) const {
    const auto idx = mask_indices(mask);
    if (idx.empty()) return sigma_(j, j);
    const Vector beta = ols(j, mask);
    double fitted = 0.0;
    for (size_t a = 0; a < idx.size(); ++a) fitted += sigma_(idx[a], j) * beta(a);
    return std::max(sigma_(j, j) - fitted, 0.0);
  }

  const Matrix& sigma_;
  int p_;
  std::vector<std::vector<double>> dense_;
  std::vector<std::unordered_map<std::uint64_t, double>> maps_;
};

struct SubsetChoice {
  std::uint64_t mask = 0;
  double rss_n = 0.0;
  int size = 0;
};

double pooled_score(double total_rss_n, int p, double lambda, int edges) {
  return p * std::log(total_rss_n / p) + lambda * lambda * edges;
}

// Best support for node j given the total residual mass of the other nodes.
SubsetChoice select_subset(RssCache& cache, int j, std::uint64_t pred_mask,
                           double t_rest, double lambda, int p, int max_parents) {
  const auto pred = mask_indices(pred_mask);
  const int npred = static_cast<int>(pred.size());
  const double lam2 = lambda * lambda;

  SubsetChoice best;
  best.mask = 0;
  best.rss_n = cache.rss(j, 0);
  best.size = 0;
  double best_val = p * std::log((t_rest + best.rss_n) / p);

  auto consider = [&](std::uint64_t mask, int size) {
    const double rss = cache.rss(j, mask);
    const double val = p * std::log((t_rest + rss) / p) + lam2 * size;
    if (val < best_val ||
        (val == best_val && (size < best.size || (size == best.size && mask < best.mask)))) {
      best_val = val;
      best = {mask, rss, size};
    }
  };

  if (npred <= kExhaustiveSubsetCap) {
    for (std::uint64_t sub = pred_mask; sub != 0; sub = (sub - 1) & pred_mask) {
      const int size = std::popcount(sub);
      if (size > max_parents) continue;
      consider(sub, size);
    }
  } else {
    std::uint64_t current = 0;
    double current_val = best_val;
    int size = 0;
    while (size < max_parents) {
      std::uint64_t best_add = 0;
      double best_add_val = current_val;
      for (int k : pred) {
        const std::uint64_t bit = std::uint64_t(1) << k;
        if (current & bit) continue;
        const double rss = cache.rss(j, current | bit);
        const double val = p * std::log((t_rest + rss) / p) + lam2 * (size + 1);
        if (val < best_add_val) {
          best_add_val = val;
          best_add = bit;
        }
      }
      if (best_add == 0) break;
      current |= best_add;
      current_val = best_add_val;
      ++size;
      consider(current, size);
    }
  }
  return best;
}

struct ScoreScratch {
  RssCache cache;
  int n;
  int p;
  int max_parents;
  explicit ScoreScratch(const Matrix& sigma, int n_)
      : cache(sigma),
        n(n_),
        p(static_cast<int>(sigma.rows())),
        max_parents(std::max(
            1, static_cast<int>(kMaxParentsAlpha * n_ / std::log(std::max(2, static_cast<int>(sigma.rows()))))) ) {}
};

struct ScoredOrdering {
  double score;
  std::vector<SubsetChoice> choice;  // per node
  double total_rss_n;
  int edges;
};

ScoredOrdering score_ordering_impl(ScoreScratch& scratch, const std::vector<int>& pi,
                                   double lambda) {
  const int p = scratch.p;
  ScoredOrdering out;
  out.choice.assign(p, SubsetChoice{});

  double total = 0.0;
  for (int pos = 0; pos < p; ++pos) {
    const int j = pi[pos];
    out.choice[j].mask = 0;
    out.choice[j].rss_n = scratch.cache.rss(j, 0);
    out.choice[j].size = 0;
    total += out.choice[j].rss_n;
  }

  std::vector<std::uint64_t> pred_mask(p, 0);
  std::uint64_t seen = 0;
  for (int pos = 0; pos < p; ++pos) {
    const int j = pi[pos];
    pred_mask[j] = seen;
    seen |= std::uint64_t(1) << j;
  }

  int edges = 0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool changed = false;
    for (int pos = 0; pos < p; ++pos) {
      const int j = pi[pos];
      const double t_rest = total - out.choice[j].rss_n;
      const SubsetChoice next =
          select_subset(scratch.cache, j, pred_mask[j], t_rest, lambda, p,
                        scratch.max_parents);
      if (next.mask != out.choice[j].mask) {
        total = t_rest + next.rss_n;
        out.choice[j] = next;
        changed = true;
      }
    }
    if (!changed) break;
  }

  edges = 0;
  for (int j = 0; j < p; ++j) edges += out.choice[j].size;
  out.total_rss_n = total;
  out.edges = edges;
  out.score = pooled_score(total, p, lambda, edges);
  return out;
}

OrderingScore finish_score(ScoreScratch& scratch, const std::vector<int>& pi,
                           const ScoredOrdering& so) {
  const int p = scratch.p;
  OrderingScore out;
  out.ordering = pi;
  out.b_hat = Matrix::Zero(p, p);
  out.residual_variances.resize(p);
  for (int j = 0; j < p; ++j) {
    out.residual_variances(j) = so.choice[j].rss_n;
    if (so.choice[j].mask) {
      const auto idx = mask_indices(so.choice[j].mask);
      const Vector beta = scratch.cache.ols(j, so.choice[j].mask);
      for (size_t a = 0; a < idx.size(); ++a) out.b_hat(idx[a], j) = beta(a);
    }
  }
  out.omega_hat_sq = so.total_rss_n / p;
  out.edge_count = so.edges;
  out.score = so.score;
  return out;
}

void validate_permutation(const std::vector<int>& pi, int p) {
  if (static_cast<int>(pi.size()) != p) {
    throw DimensionMismatch("ordering length must equal the number of variables");
  }
  std::vector<char> used(p, 0);
  for (int v : pi) {
    if (v < 0 || v >= p || used[v]) {
      throw ValidationError("ordering is not a permutation of the nodes");
    }
    used[v] = 1;
  }
}

Matrix uncentered_covariance(const DataMatrix& data) {
  const Matrix& x = data.values();
  Matrix s = (x.transpose() * x) / static_cast<double>(data.n());
  return ((s + s.transpose()) * 0.5).eval();
}

}  // namespace

Matrix DagModel::theta0() const {
  const Matrix ib = Matrix::Identity(p(), p()) - b;
  return (ib * ib.transpose()) / (omega * omega);
}

Matrix DagModel::sigma0() const {
  const Matrix ib = Matrix::Identity(p(), p()) - b;
  const Matrix inv = ib.inverse();
  return (omega * omega) * (inv.transpose() * inv);
}

void validate_dag(const DagModel& model) {
  const int p = model.p();
  if (model.b.rows() != model.b.cols()) {
    throw DimensionMismatch("dag model: b must be square");
  }
  validate_permutation(model.ordering, p);
  for (int a = 0; a < p; ++a) {
    for (int bpos = a; bpos < p; ++bpos) {
      // edge from a later node into an earlier-or-equal one breaks acyclicity
      if (model.b(model.ordering[bpos], model.ordering[a]) != 0.0) {
        throw ValidationError("dag model: weights are not acyclic under the ordering");
      }
    }
  }
}

OrderingScore score_ordering(const DataMatrix& data, const std::vector<int>& pi,
                             double lambda) {
  if (data.p() > kMaxDagNodes) {
    throw ValidationError("dag scoring supports at most 62 variables");
  }
  if (!(lambda >= 0.0)) throw ValidationError("score_ordering: lambda must be nonnegative");
  validate_permutation(pi, data.p());
  const Matrix sigma = uncentered_covariance(data);
  ScoreScratch scratch(sigma, data.n());
  const auto so = score_ordering_impl(scratch, pi, lambda);
  return finish_score(scratch, pi, so);
}

OrderingScore search_ordering(const DataMatrix& data, double lambda, SearchMode mode,
                              std::uint64_t seed) {
  const int p = data.p();
  if (p > kMaxDagNodes) {
    throw ValidationError("dag scoring supports at most 62 variables");
  }
  if (!(lambda >= 0.0)) throw ValidationError("search_ordering: lambda must be nonnegative");
  const Matrix sigma = uncentered_covariance(data);
  ScoreScratch scratch(sigma, data.n());

  std::vector<int> best_pi;
  ScoredOrdering best_so;
  double best_score = std::numeric_limits<double>::infinity();

  auto offer = [&](const std::vector<int>& pi) {
    const auto so = score_ordering_impl(scratch, pi, lambda);
    if (so.score < best_score ||
        (so.score == best_score && !best_pi.empty() && pi < best_pi)) {
      best_score = so.score;
      best_pi = pi;
      best_so = so;
    }
  };

  if (mode == SearchMode::exhaustive) {
    if (p > 9) {
      throw TooLargeForExhaustive("exhaustive ordering search is limited to p <= 9");
    }
    std::vector<int> pi(p);
    for (int i = 0; i < p; ++i) pi[i] = i;
    do {
      offer(pi);
    } while (std::next_permutation(pi.begin(), pi.end()));
  } else {
    const int starts = 16;
    for (int s = 0; s < starts; ++s) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(s), 0x9a11));
      std::vector<int> pi(p);
      for (int i = 0; i < p; ++i) pi[i] = i;
      for (int i = p - 1; i > 0; --i) {
        const int k = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(pi[i], pi[k]);
      }

      double cur = score_ordering_impl(scratch, pi, lambda).score;
      for (;;) {
        int best_swap = -1;
        double best_neighbor = cur;
        for (int i = 0; i + 1 < p; ++i) {
          std::swap(pi[i], pi[i + 1]);
          const double v = score_ordering_impl(scratch, pi, lambda).score;
          std::swap(pi[i], pi[i + 1]);
          if (v < best_neighbor) {
            best_neighbor = v;
            best_swap = i;
          }
        }
        if (best_swap < 0) break;
        std::swap(pi[best_swap], pi[best_swap + 1]);
        cur = best_neighbor;
      }
      offer(pi);
    }
  }
  return finish_score(scratch, best_pi, best_so);
}

std::vector<int> predecessors_of(const std::vector<int>& ordering, int j) {
  std::vector<int> pred;
  for (int node : ordering) {
    if (node == j) break;
    pred.push_back(node);
  }
  return pred;
}

namespace {

Matrix gather_columns(const DataMatrix& data, const std::vector<int>& cols) {
  Matrix out(data.n(), static_cast<Eigen::Index>(cols.size()));
  for (size_t a = 0; a < cols.size(); ++a) out.col(a) = data.values().col(cols[a]);
  return out;
}

double default_lambda(const DataMatrix& data) {
  return std::sqrt(std::log(static_cast<double>(data.p())) / data.n());
}

// Nodewise-lasso surrogate inverse of the predecessor Gram matrix, with
// unweighted penalties and the tau_tilde normalization.
Matrix surrogate_inverse(const Matrix& xpred, int n, double lambda) {
  const int q = static_cast<int>(xpred.cols());
  const Matrix gram = (xpred.transpose() * xpred) / static_cast<double>(n);
  Matrix theta = Matrix::Zero(q, q);
  if (q == 1) {
    if (!(gram(0, 0) > 0.0)) {
      throw DegenerateResidual("surrogate inverse: zero-scale predecessor");
    }
    theta(0, 0) = 1.0 / gram(0, 0);
    return theta;
  }
  for (int a = 0; a < q; ++a) {
    Matrix g11(q - 1, q - 1);
    Vector g12(q - 1);
    int r = 0;
    for (int i = 0; i < q; ++i) {
      if (i == a) continue;
      int c = 0;
      for (int k = 0; k < q; ++k) {
        if (k == a) continue;
        g11(r, c) = gram(i, k);
        ++c;
      }
      g12(r) = gram(i, a);
      ++r;
    }
    Vector gamma = Vector::Zero(q - 1);
    Vector gb = Vector::Zero(q - 1);
    const Vector penalty = Vector::Constant(q - 1, lambda);
    detail::gram_lasso(g11, g12, penalty, gamma, gb, 1e-9, 10000);

    Vector resid = xpred.col(a);
    int idx = 0;
    for (int k = 0; k < q; ++k) {
      if (k == a) continue;
      if (gamma(idx) != 0.0) resid.noalias() -= gamma(idx) * xpred.col(k);
      ++idx;
    }
    const double tau_sq = resid.squaredNorm() / n;
    const double tau = std::sqrt(tau_sq);
    if (tau < 1e-10) {
      throw DegenerateResidual("surrogate inverse: residual collapsed");
    }
    const double tau_tilde_sq = tau_sq + lambda * tau * gamma.cwiseAbs().sum();
    theta(a, a) = 1.0 / tau_tilde_sq;
    idx = 0;
    for (int k = 0; k < q; ++k) {
      if (k == a) continue;
      theta(k, a) = -gamma(idx) / tau_tilde_sq;
      ++idx;
    }
  }
  return theta;
}

}  // namespace

Vector predecessor_regression(const DataMatrix& data, const std::vector<int>& ordering,
                              int j, double lambda_j) {
  validate_permutation(ordering, data.p());
  const auto pred = predecessors_of(ordering, j);
  if (pred.empty()) return Vector();
  LassoProblem prob;
  prob.design = gather_columns(data, pred);
  prob.response = data.values().col(j);
  prob.lambda = lambda_j < 0.0 ? default_lambda(data) : lambda_j;
  return solve_lasso(prob).coefficients;
}

DagColumnInference debias_dag_column(const DataMatrix& data,
                                     const std::vector<int>& ordering, int j,
                                     double lambda_j, double lambda_kj) {
  validate_permutation(ordering, data.p());
  const int n = data.n();
  DagColumnInference out;
  out.node = j;
  out.predecessors = predecessors_of(ordering, j);
  const int q = static_cast<int>(out.predecessors.size());
  if (q == 0) {
    out.omega_hat = data.values().col(j).norm() / std::sqrt(static_cast<double>(n));
    return out;
  }

  const Matrix xpred = gather_columns(data, out.predecessors);
  LassoProblem prob;
  prob.design = xpred;
  prob.response = data.values().col(j);
  prob.lambda = lambda_j < 0.0 ? default_lambda(data) : lambda_j;
  out.beta_hat = solve_lasso(prob).coefficients;

  const Vector resid = prob.response - xpred * out.beta_hat;
  const double omega_sq = resid.squaredNorm() / n;
  out.omega_hat = std::sqrt(omega_sq);

  const double lkj = lambda_kj < 0.0 ? default_lambda(data) : lambda_kj;
  const Matrix theta = surrogate_inverse(xpred, n, lkj);

  const Vector corr = (xpred.transpose() * resid) / static_cast<double>(n);
  out.b_debiased = out.beta_hat + theta.transpose() * corr;
  out.sigma.resize(q);
  for (int k = 0; k < q; ++k) {
    out.sigma(k) = std::sqrt(omega_sq * theta(k, k));
  }
  return out;
}

DagFit fit_dag(const DataMatrix& data, const DagFitOptions& opts) {
  const double lambda = opts.lambda < 0.0 ? default_lambda(data) : opts.lambda;
  DagFit fit;
  if (opts.known_ordering) {
    validate_permutation(*opts.known_ordering, data.p());
    fit.search = score_ordering(data, *opts.known_ordering, lambda);
  } else {
    fit.search = search_ordering(data, lambda, opts.mode, opts.seed);
  }
  fit.ordering_hat = fit.search.ordering;

  const int p = data.p();
  fit.columns.resize(p);
  parallel_for(p, [&](int j) {
    fit.columns[j] =
        debias_dag_column(data, fit.ordering_hat, j, opts.lambda_j, opts.lambda_kj);
  });
  return fit;
}

}  // namespace precis
