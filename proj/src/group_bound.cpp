#include "groupbound/group_bound.hpp"

#include <algorithm>
#include <string>

#include "groupbound/basis_pursuit.hpp"
#include "groupbound/errors.hpp"
#include "groupbound/lp.hpp"
#include "groupbound/parallel.hpp"
#include "groupbound/projection.hpp"

namespace groupbound {

SplitContext build_split_context(const RegressionData& data_half,
                                 const Eigen::VectorXd& beta_hat,
                                 double alpha_split, int s,
                                 Calibration& calibration, Rng& rng,
                                 unsigned threads) {
  data_half.validate();
  const Eigen::Index p = data_half.p();
  if (beta_hat.size() != p) {
    throw DimensionMismatch("build_split_context: beta_hat length " +
                            std::to_string(beta_hat.size()) +
                            " does not match p = " + std::to_string(p));
  }
  if (!(alpha_split > 0.0 && alpha_split < 1.0)) {
    throw std::invalid_argument(
        "build_split_context: alpha_split must be in (0,1)");
  }

  const Eigen::VectorXd signal = data_half.X * beta_hat;
  const Projection proj = build_projection(signal, s, rng);

  SplitContext ctx;
  ctx.AX = proj.A * data_half.X;
  ctx.AY = proj.A * data_half.Y;
  ctx.alpha_split = alpha_split;

  const Eigen::VectorXd residual = data_half.Y - signal;
  ctx.mu = 3.0 * (proj.A * residual).norm();

  const int m = calibration.vertex_count(s, alpha_split);
  ctx.region = sample_region(s, m, ctx.mu, rng);

  ctx.vertex_norms.resize(2 * m);
  parallel_for(static_cast<std::size_t>(2 * m), threads, [&](std::size_t k) {
    const Eigen::VectorXd target =
        ctx.AY + ctx.mu * ctx.region.E.col(static_cast<Eigen::Index>(k));
    try {
      ctx.vertex_norms(static_cast<Eigen::Index>(k)) =
          basis_pursuit(ctx.AX, target).l1_norm;
    } catch (const InfeasibleSystem&) {
      throw InfeasibleSystem("build_split_context: vertex " +
                             std::to_string(k) +
                             " basis-pursuit system infeasible");
    }
  });
  return ctx;
}

namespace {

std::vector<int> normalize_group(const std::vector<int>& group, int p) {
  if (group.empty()) {
    throw std::invalid_argument("lower_bound: empty group");
  }
  std::vector<int> g = group;
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (g.front() < 0 || g.back() >= p) {
    throw DimensionMismatch("lower_bound: group index out of range [0, " +
                            std::to_string(p) + ")");
  }
  return g;
}

}  // namespace

GroupBound lower_bound(const SplitContext& ctx, const std::vector<int>& group) {
  const int s = ctx.s();
  const int p = ctx.p();
  const int two_m = static_cast<int>(ctx.region.E.cols());
  const std::vector<int> g = normalize_group(group, p);

  // Columns: beta+ (p), beta- (p), gamma (2m), slack for the norm budget.
  const int d = 2 * p + two_m + 1;
  lp::Problem pb;
  pb.c = Eigen::VectorXd::Zero(d);
  for (int j : g) {
    pb.c(j) = 1.0;
    pb.c(p + j) = 1.0;
  }
  pb.Aeq = Eigen::MatrixXd::Zero(s + 2, d);
  pb.beq = Eigen::VectorXd::Zero(s + 2);

  pb.Aeq.block(0, 0, s, p) = ctx.AX;
  pb.Aeq.block(0, p, s, p) = -ctx.AX;
  pb.Aeq.block(0, 2 * p, s, two_m) = -ctx.mu * ctx.region.E;
  pb.beq.head(s) = ctx.AY;

  pb.Aeq.block(s, 2 * p, 1, two_m).setOnes();  // sum(gamma) = 1
  pb.beq(s) = 1.0;

  pb.Aeq.block(s + 1, 0, 1, 2 * p).setOnes();  // total l1 norm...
  pb.Aeq.block(s + 1, 2 * p, 1, two_m) =
      -ctx.vertex_norms.transpose();           // ...within the gamma budget
  pb.Aeq(s + 1, d - 1) = 1.0;
  pb.beq(s + 1) = 0.0;

  const lp::Solution sol = lp::solve(pb);
  if (sol.status != lp::Status::Optimal) {
    // Every vertex solution is feasible with gamma = e_k, so this cannot
    // happen for a context whose vertex solves succeeded.
    throw NumericalFailure("lower_bound: relaxed LP not optimal");
  }

  GroupBound out;
  out.group = g;
  out.alpha = ctx.alpha_split;
  out.lower_bound = std::max(0.0, sol.value);
  out.rejected = out.lower_bound > kRejectTol;
  return out;
}

std::vector<GroupBound> bound_many(
    const SplitContext& ctx, const std::vector<std::vector<int>>& groups) {
  std::vector<GroupBound> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(lower_bound(ctx, g));
  return out;
}

}  // namespace groupbound
