#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "groupbound/calibration.hpp"
#include "groupbound/data.hpp"
#include "groupbound/group_bound.hpp"
#include "groupbound/lasso.hpp"

namespace groupbound {

/// K random partitions of {0..n-1} into two near-equal halves: the first
/// half fits the initial estimator, the second feeds the bound.
struct SplitPlan {
  int K = 0;
  double epsilon = 0.0;
  double alpha = 0.0;
  std::vector<std::pair<std::vector<int>, std::vector<int>>> splits;
  std::uint64_t seed = 0;
};

SplitPlan make_split_plan(int n, int K, double epsilon, double alpha,
                          std::uint64_t seed);

/// Ascending order statistic at index ceil((1-epsilon) K) (1-based); the
/// finite-sample quantile used to aggregate per-split bounds.
double aggregate_quantile(std::vector<double> values, double epsilon);

struct AggregateOptions {
  int K = 11;
  double epsilon = 0.1;
  int s = 0;  // <= 0: min(10, p, floor(n/2))
  unsigned threads = 1;
  LassoOptions lasso;
  int cv_folds = 10;
};

struct AggregatedBound {
  GroupBound bound;                // aggregated; alpha = overall level
  std::vector<double> per_split;   // T_G^(k), split order
  double alpha_split = 0.0;        // level each split was run at
  int m = 0;                       // vertex count used per split
};

/// Multi-split pipeline: for each of K random splits, fit the CV lasso on
/// one half, build a SplitContext on the other half at level alpha*epsilon,
/// bound every group, then aggregate per group with the (1-epsilon)-quantile
/// order statistic. A failing split aborts with its index in the message.
std::vector<AggregatedBound> aggregate_bounds(
    const RegressionData& data, const std::vector<std::vector<int>>& groups,
    double alpha, Calibration& calibration, std::uint64_t seed,
    const AggregateOptions& options = {});

/// Node of an average-linkage dendrogram over variables; bounds attach
/// during cluster testing.
struct ClusterNode {
  std::vector<int> members;  // sorted 0-based column indices
  double height = 0.0;
  std::shared_ptr<ClusterNode> left, right;
  std::optional<GroupBound> bound;  // aggregated bound when tested
  bool tested = false;
  bool pruned = false;
  int id = 0;

  bool leaf() const { return !left && !right; }
};

/// Full dendrogram under distance 1 - |correlation| with average linkage
/// (Lance-Williams update). Zero-variance columns get correlation 0 by
/// convention. Throws std::invalid_argument for p < 2.
std::shared_ptr<ClusterNode> average_linkage_tree(const Eigen::MatrixXd& X);

struct ClusterTestOptions {
  AggregateOptions aggregate;
  /// When set, node G is tested at level alpha * |G| / p instead of alpha
  /// (Bonferroni-style weighting; off by default, matching the plain
  /// all-nodes-at-alpha scheme).
  bool bonferroni = false;
};

/// Top-down testing over the dendrogram: the root is always tested; children
/// are tested only when the parent's aggregated bound rejects. Per-split
/// lasso fits, projections and vertex norms are computed once and reused for
/// every node. Untested descendants of a non-rejected node are marked pruned.
void cluster_test(const RegressionData& data,
                  const std::shared_ptr<ClusterNode>& root, double alpha,
                  Calibration& calibration, std::uint64_t seed,
                  const ClusterTestOptions& options = {});

}  // namespace groupbound
