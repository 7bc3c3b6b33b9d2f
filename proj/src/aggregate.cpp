#include "groupbound/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "groupbound/errors.hpp"
#include "groupbound/parallel.hpp"

namespace groupbound {

namespace {
// Distinct stream offsets so plan, per-split work and extra contexts never
// share a derived rng.
constexpr std::uint64_t kStreamPlan = 0x100000ull;
constexpr std::uint64_t kStreamWork = 0x200000ull;
constexpr std::uint64_t kStreamLevel = 0x400000ull;
}  // namespace

SplitPlan make_split_plan(int n, int K, double epsilon, double alpha,
                          std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("make_split_plan: need n >= 2");
  if (K < 1) throw std::invalid_argument("make_split_plan: need K >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("make_split_plan: epsilon must be in (0,1)");
  }
  SplitPlan plan;
  plan.K = K;
  plan.epsilon = epsilon;
  plan.alpha = alpha;
  plan.seed = seed;
  plan.splits.reserve(static_cast<std::size_t>(K));
  const int n1 = (n + 1) / 2;  // estimation half; sizes differ by <= 1
  for (int k = 0; k < K; ++k) {
    Rng rng = Rng::derive(seed, kStreamPlan + static_cast<std::uint64_t>(k));
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<int> first(order.begin(), order.begin() + n1);
    std::vector<int> second(order.begin() + n1, order.end());
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    plan.splits.emplace_back(std::move(first), std::move(second));
  }
  return plan;
}

double aggregate_quantile(std::vector<double> values, double epsilon) {
  if (values.empty()) {
    throw std::invalid_argument("aggregate_quantile: empty sample");
  }
  std::sort(values.begin(), values.end());
  const double k = static_cast<double>(values.size());
  auto idx = static_cast<std::size_t>(std::ceil((1.0 - epsilon) * k - 1e-9));
  idx = std::min(std::max<std::size_t>(idx, 1), values.size());
  return values[idx - 1];
}

namespace {

int effective_s(int requested, Eigen::Index p, int n_half) {
  if (requested > 0) {
    if (requested > n_half) {
      throw std::invalid_argument("projection dimension s = " +
                                  std::to_string(requested) +
                                  " exceeds inference-half size " +
                                  std::to_string(n_half));
    }
    return requested;
  }
  return std::max(1, std::min({10, static_cast<int>(p), n_half}));
}

struct SplitWork {
  RegressionData half2;
  Eigen::VectorXd beta_hat;
  SplitContext ctx;
};

SplitWork run_split(const RegressionData& data, const SplitPlan& plan, int k,
                    double alpha_split, int s, Calibration& calibration,
                    std::uint64_t seed, const AggregateOptions& opt) {
  Rng rng = Rng::derive(seed, kStreamWork + static_cast<std::uint64_t>(k));
  const RegressionData half1 = data.subset(plan.splits[k].first);
  SplitWork work;
  work.half2 = data.subset(plan.splits[k].second);
  const int folds =
      std::min<int>(opt.cv_folds, static_cast<int>(half1.n()));
  const LassoFit fit = cv_lasso(half1.X, half1.Y, folds, rng, opt.lasso);
  work.beta_hat = fit.coefficients;
  work.ctx = build_split_context(work.half2, work.beta_hat, alpha_split, s,
                                 calibration, rng, /*threads=*/1);
  return work;
}

}  // namespace

std::vector<AggregatedBound> aggregate_bounds(
    const RegressionData& data, const std::vector<std::vector<int>>& groups,
    double alpha, Calibration& calibration, std::uint64_t seed,
    const AggregateOptions& options) {
  data.validate();
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("aggregate_bounds: alpha must be in (0,1)");
  }
  const SplitPlan plan = make_split_plan(static_cast<int>(data.n()), options.K,
                                         options.epsilon, alpha, seed);
  if (groups.empty()) return {};

  const int n_half2 = static_cast<int>(data.n()) / 2;
  const int s = effective_s(options.s, data.p(), n_half2);
  const double alpha_split = alpha * options.epsilon;
  calibration.vertex_count(s, alpha_split);  // warm once, not per thread

  std::vector<std::vector<GroupBound>> per_split(
      static_cast<std::size_t>(options.K));
  std::vector<int> m_used(static_cast<std::size_t>(options.K), 0);
  parallel_for(static_cast<std::size_t>(options.K), options.threads,
               [&](std::size_t k) {
                 try {
                   const SplitWork work =
                       run_split(data, plan, static_cast<int>(k), alpha_split,
                                 s, calibration, seed, options);
                   per_split[k] = bound_many(work.ctx, groups);
                   m_used[k] = work.ctx.region.m;
                 } catch (const std::exception& e) {
                   throw NumericalFailure("aggregate_bounds: split " +
                                          std::to_string(k) +
                                          " failed: " + e.what());
                 }
               });

  std::vector<AggregatedBound> out;
  out.reserve(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    AggregatedBound agg;
    agg.per_split.reserve(static_cast<std::size_t>(options.K));
    for (int k = 0; k < options.K; ++k) {
      agg.per_split.push_back(
          per_split[static_cast<std::size_t>(k)][gi].lower_bound);
    }
    agg.bound.group = per_split[0][gi].group;
    agg.bound.alpha = alpha;
    agg.bound.lower_bound = aggregate_quantile(agg.per_split, options.epsilon);
    agg.bound.rejected = agg.bound.lower_bound > kRejectTol;
    agg.alpha_split = alpha_split;
    agg.m = m_used[0];
    out.push_back(std::move(agg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hierarchical clustering
// ---------------------------------------------------------------------------

std::shared_ptr<ClusterNode> average_linkage_tree(const Eigen::MatrixXd& X) {
  const int p = static_cast<int>(X.cols());
  if (p < 2) {
    throw std::invalid_argument("average_linkage_tree: need p >= 2 columns");
  }
  // Distance 1 - |rho|; zero-variance columns get rho = 0 by convention.
  Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  Eigen::VectorXd norms(p);
  for (int j = 0; j < p; ++j) norms(j) = centered.col(j).norm();
  Eigen::MatrixXd dist(p, p);
  for (int i = 0; i < p; ++i) {
    dist(i, i) = std::numeric_limits<double>::infinity();
    for (int j = i + 1; j < p; ++j) {
      double rho = 0.0;
      if (norms(i) > 1e-12 && norms(j) > 1e-12) {
        rho = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
      }
      const double d = 1.0 - std::min(1.0, std::abs(rho));
      dist(i, j) = d;
      dist(j, i) = d;
    }
  }

  std::vector<std::shared_ptr<ClusterNode>> node(static_cast<std::size_t>(p));
  std::vector<int> size(static_cast<std::size_t>(p), 1);
  std::vector<bool> active(static_cast<std::size_t>(p), true);
  for (int i = 0; i < p; ++i) {
    node[static_cast<std::size_t>(i)] = std::make_shared<ClusterNode>();
    node[static_cast<std::size_t>(i)]->members = {i};
    node[static_cast<std::size_t>(i)]->id = i;
  }

  // Nearest-neighbour bookkeeping; exact for the reducible average linkage.
  std::vector<int> nn(static_cast<std::size_t>(p), -1);
  auto recompute_nn = [&](int i) {
    int best = -1;
    for (int j = 0; j < p; ++j) {
      if (j == i || !active[static_cast<std::size_t>(j)]) continue;
      if (best < 0 || dist(i, j) < dist(i, best)) best = j;
    }
    nn[static_cast<std::size_t>(i)] = best;
  };
  for (int i = 0; i < p; ++i) recompute_nn(i);

  int next_id = p;
  for (int merge = 0; merge < p - 1; ++merge) {
    int bi = -1;
    for (int i = 0; i < p; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      if (nn[static_cast<std::size_t>(i)] < 0) continue;
      if (bi < 0 ||
          dist(i, nn[static_cast<std::size_t>(i)]) <
              dist(bi, nn[static_cast<std::size_t>(bi)])) {
        bi = i;
      }
    }
    int i = bi;
    int j = nn[static_cast<std::size_t>(bi)];
    if (j < i) std::swap(i, j);
    const double h = dist(i, j);

    auto merged = std::make_shared<ClusterNode>();
    merged->left = node[static_cast<std::size_t>(i)];
    merged->right = node[static_cast<std::size_t>(j)];
    merged->height = h;
    merged->id = next_id++;
    merged->members = merged->left->members;
    merged->members.insert(merged->members.end(),
                           merged->right->members.begin(),
                           merged->right->members.end());
    std::sort(merged->members.begin(), merged->members.end());

    const double si = size[static_cast<std::size_t>(i)];
    const double sj = size[static_cast<std::size_t>(j)];
    for (int k = 0; k < p; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == i || k == j) continue;
      const double d = (si * dist(i, k) + sj * dist(j, k)) / (si + sj);
      dist(i, k) = d;
      dist(k, i) = d;
    }
    active[static_cast<std::size_t>(j)] = false;
    size[static_cast<std::size_t>(i)] += size[static_cast<std::size_t>(j)];
    node[static_cast<std::size_t>(i)] = merged;

    recompute_nn(i);
    for (int k = 0; k < p; ++k) {
      if (!active[static_cast<std::size_t>(k)] || k == i) continue;
      const int cur = nn[static_cast<std::size_t>(k)];
      if (cur == i || cur == j) {
        recompute_nn(k);
      } else if (dist(k, i) < dist(k, cur)) {
        nn[static_cast<std::size_t>(k)] = i;
      }
    }
  }

  for (int i = 0; i < p; ++i) {
    if (active[static_cast<std::size_t>(i)]) {
      return node[static_cast<std::size_t>(i)];
    }
  }
  throw NumericalFailure("average_linkage_tree: no root produced");
}

namespace {

void mark_pruned(const std::shared_ptr<ClusterNode>& node) {
  if (!node) return;
  node->pruned = true;
  node->tested = false;
  node->bound.reset();
  mark_pruned(node->left);
  mark_pruned(node->right);
}

struct PreparedSplit {
  RegressionData half2;
  Eigen::VectorXd beta_hat;
  std::map<int, SplitContext> ctx_by_m;  // keyed by vertex count
};

}  // namespace

void cluster_test(const RegressionData& data,
                  const std::shared_ptr<ClusterNode>& root, double alpha,
                  Calibration& calibration, std::uint64_t seed,
                  const ClusterTestOptions& options) {
  data.validate();
  if (!root) throw std::invalid_argument("cluster_test: null tree");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("cluster_test: alpha must be in (0,1)");
  }
  const AggregateOptions& aopt = options.aggregate;
  const int p = static_cast<int>(data.p());
  const SplitPlan plan = make_split_plan(static_cast<int>(data.n()), aopt.K,
                                         aopt.epsilon, alpha, seed);
  const int n_half2 = static_cast<int>(data.n()) / 2;
  const int s = effective_s(aopt.s, data.p(), n_half2);

  // One lasso fit and (by default) one context per split, shared by every
  // node. With the Bonferroni flag, contexts are cached per vertex count.
  std::vector<PreparedSplit> splits(static_cast<std::size_t>(aopt.K));
  const double root_alpha_split = alpha * aopt.epsilon;
  calibration.vertex_count(s, root_alpha_split);
  parallel_for(
      static_cast<std::size_t>(aopt.K), aopt.threads, [&](std::size_t k) {
        try {
          Rng rng = Rng::derive(seed, kStreamWork + k);
          const RegressionData half1 = data.subset(plan.splits[k].first);
          PreparedSplit& ps = splits[k];
          ps.half2 = data.subset(plan.splits[k].second);
          const int folds =
              std::min<int>(aopt.cv_folds, static_cast<int>(half1.n()));
          ps.beta_hat =
              cv_lasso(half1.X, half1.Y, folds, rng, aopt.lasso).coefficients;
          const int m = calibration.vertex_count(s, root_alpha_split);
          ps.ctx_by_m.emplace(
              m, build_split_context(ps.half2, ps.beta_hat, root_alpha_split,
                                     s, calibration, rng, 1));
        } catch (const std::exception& e) {
          throw NumericalFailure("cluster_test: split " + std::to_string(k) +
                                 " failed: " + e.what());
        }
      });

  auto context_for = [&](std::size_t k, double alpha_split) -> SplitContext& {
    PreparedSplit& ps = splits[k];
    const int m = calibration.vertex_count(s, alpha_split);
    auto it = ps.ctx_by_m.find(m);
    if (it == ps.ctx_by_m.end()) {
      Rng rng = Rng::derive(seed, kStreamLevel + (k << 24) +
                                      static_cast<std::uint64_t>(m));
      it = ps.ctx_by_m
               .emplace(m, build_split_context(ps.half2, ps.beta_hat,
                                               alpha_split, s, calibration,
                                               rng, 1))
               .first;
    }
    return it->second;
  };

  auto test_node = [&](const std::shared_ptr<ClusterNode>& node) {
    const double node_alpha =
        options.bonferroni
            ? alpha * static_cast<double>(node->members.size()) /
                  static_cast<double>(p)
            : alpha;
    const double alpha_split = node_alpha * aopt.epsilon;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(aopt.K));
    for (std::size_t k = 0; k < static_cast<std::size_t>(aopt.K); ++k) {
      values.push_back(
          lower_bound(context_for(k, alpha_split), node->members).lower_bound);
    }
    GroupBound agg;
    agg.group = node->members;
    agg.alpha = node_alpha;
    agg.lower_bound = aggregate_quantile(values, aopt.epsilon);
    agg.rejected = agg.lower_bound > kRejectTol;
    node->bound = agg;
    node->tested = true;
    node->pruned = false;
  };

  std::deque<std::shared_ptr<ClusterNode>> queue{root};
  while (!queue.empty()) {
    auto node = queue.front();
    queue.pop_front();
    test_node(node);
    if (node->bound->rejected) {
      if (node->left) queue.push_back(node->left);
      if (node->right) queue.push_back(node->right);
    } else {
      mark_pruned(node->left);
      mark_pruned(node->right);
    }
  }
}

}  // namespace groupbound
