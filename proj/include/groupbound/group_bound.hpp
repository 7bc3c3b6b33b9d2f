#pragma once

#include <Eigen/Dense>
#include <vector>

#include "groupbound/calibration.hpp"
#include "groupbound/data.hpp"
#include "groupbound/noise_region.hpp"
#include "groupbound/rng.hpp"

namespace groupbound {

/// Rejection threshold on the lower bound; optima this close to zero are LP
/// round-off, exact zeros are vertex solutions.
inline constexpr double kRejectTol = 1e-7;

/// Everything one data half contributes to bound computations: projected
/// data, the scaled noise region, and the l1-norms of the basis-pursuit
/// solutions at the 2m region vertices. Immutable once built; group solves
/// reuse it because the vertex norms do not depend on the group.
struct SplitContext {
  Eigen::MatrixXd AX;            // s x p
  Eigen::VectorXd AY;            // s
  NoiseRegion region;            // dim s, scale mu
  Eigen::VectorXd vertex_norms;  // 2m
  double mu = 0.0;               // 3 |A (Y - X beta_hat)|_2
  double alpha_split = 0.0;

  int s() const { return static_cast<int>(AX.rows()); }
  int p() const { return static_cast<int>(AX.cols()); }
};

struct GroupBound {
  std::vector<int> group;  // sorted unique 0-based indices
  double alpha = 0.0;
  double lower_bound = 0.0;
  bool rejected = false;
};

/// Steps 1-3 of the single-split procedure on one data half, given an
/// initial estimate fitted on disjoint rows: project onto the span of the
/// estimated signal direction plus s-1 random directions, set
/// mu = 3 |A R|_2, look up the calibrated vertex count for dimension s at
/// alpha_split, sample the region, and solve basis pursuit at every vertex.
SplitContext build_split_context(const RegressionData& data_half,
                                 const Eigen::VectorXd& beta_hat,
                                 double alpha_split, int s,
                                 Calibration& calibration, Rng& rng,
                                 unsigned threads = 1);

/// The group statistic: minimize sum_{j in G} (bp_j + bm_j) over
/// bp, bm, gamma >= 0 subject to sum(gamma) = 1,
/// sum_j (bp_j + bm_j) <= sum_k gamma_k l_k and
/// AX (bp - bm) = AY + mu E gamma. Optimum clamped at zero.
GroupBound lower_bound(const SplitContext& ctx, const std::vector<int>& group);

/// lower_bound per group against the same context (vertex solves amortized).
std::vector<GroupBound> bound_many(const SplitContext& ctx,
                                   const std::vector<std::vector<int>>& groups);

}  // namespace groupbound
