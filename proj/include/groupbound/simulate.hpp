#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "groupbound/aggregate.hpp"
#include "groupbound/data.hpp"
#include "groupbound/rng.hpp"

namespace groupbound {

/// Block-correlated Gaussian design: p variables in blocks of B, unit
/// variances, within-block correlation rho_w, between-block rho_b. The
/// signal puts value tau on the even 1-based positions {2,4,...,B} of the
/// first block.
struct SimSetting {
  std::string name;
  int p = 0;
  int n = 0;
  int B = 0;
  double rho_w = 0.0;
  double rho_b = 0.0;
  double tau = 0.0;
  double sigma = 1.0;
};

/// The six canonical settings (i)..(vi). Throws UnknownSetting.
SimSetting build_setting(const std::string& name, double sigma);

struct SimulatedData {
  RegressionData data;
  Eigen::VectorXd beta_star;
};

/// Rows i.i.d. N(0, Sigma) via a Cholesky factor of the block covariance
/// (one jitter retry, then CovarianceNotPSD), response X beta* + sigma eps.
SimulatedData simulate_dataset(const SimSetting& setting, Rng& rng);

struct NamedGroup {
  std::string name;
  std::vector<int> indices;  // 0-based
};

/// The Figure-2 style defaults: the singleton {2}, the first half of block
/// one, block one, and the group of all zero-coefficient variables.
std::vector<NamedGroup> default_groups(const SimSetting& setting);

struct GroupOutcome {
  NamedGroup group;
  int sims = 0;
  int rejections = 0;
  double rate = 0.0;
  double mean_bound = 0.0;
};

struct ExperimentResult {
  SimSetting setting;
  double alpha = 0.0;
  std::vector<GroupOutcome> outcomes;
};

/// Rejection frequencies over independent datasets: each simulation draws a
/// dataset, runs the multi-split pipeline, and records the aggregated bound
/// per group. Per-simulation seeds derive from (seed, index).
ExperimentResult run_experiment(const SimSetting& setting,
                                const std::vector<NamedGroup>& groups,
                                int sims, double alpha,
                                Calibration& calibration, std::uint64_t seed,
                                const AggregateOptions& options = {});

}  // namespace groupbound
