#include "groupbound/simulate.hpp"

#include <Eigen/Cholesky>
#include <atomic>
#include <cmath>

#include "groupbound/errors.hpp"
#include "groupbound/parallel.hpp"

namespace groupbound {

SimSetting build_setting(const std::string& name, double sigma) {
  SimSetting s;
  s.name = name;
  s.sigma = sigma;
  if (name == "i") {
    s.p = 200; s.n = 50; s.B = 10; s.rho_w = 0.99; s.rho_b = 0.00; s.tau = 0.5;
  } else if (name == "ii") {
    s.p = 200; s.n = 200; s.B = 20; s.rho_w = 0.999; s.rho_b = 0.00; s.tau = 1.0;
  } else if (name == "iii") {
    s.p = 1000; s.n = 300; s.B = 50; s.rho_w = 0.8; s.rho_b = 0.10; s.tau = 2.0;
  } else if (name == "iv") {
    s.p = 200; s.n = 100; s.B = 50; s.rho_w = 0.99; s.rho_b = 0.10; s.tau = 2.0;
  } else if (name == "v") {
    s.p = 300; s.n = 200; s.B = 100; s.rho_w = 0.999; s.rho_b = 0.00; s.tau = 1.0;
  } else if (name == "vi") {
    s.p = 300; s.n = 200; s.B = 100; s.rho_w = 0.995; s.rho_b = 0.50; s.tau = 1.0;
  } else {
    throw UnknownSetting("unknown simulation setting '" + name +
                         "' (expected i..vi)");
  }
  return s;
}

namespace {

void validate_setting(const SimSetting& s) {
  if (s.p < 1 || s.n < 1 || s.B < 1 || s.B > s.p) {
    throw std::invalid_argument("simulate: need 1 <= B <= p and n >= 1");
  }
  if (s.B % 2 != 0) {
    throw std::invalid_argument("simulate: block size B must be even");
  }
  if (s.rho_w < 0.0 || s.rho_w >= 1.0 || s.rho_b < 0.0 || s.rho_b >= 1.0) {
    throw std::invalid_argument("simulate: correlations must lie in [0,1)");
  }
  if (s.sigma < 0.0) {
    throw std::invalid_argument("simulate: sigma must be >= 0");
  }
}

Eigen::MatrixXd block_covariance(const SimSetting& s) {
  Eigen::MatrixXd sigma =
      Eigen::MatrixXd::Constant(s.p, s.p, s.rho_b);
  for (int j = 0; j < s.p; ++j) {
    const int bj = j / s.B;
    for (int k = j; k < s.p; ++k) {
      if (k / s.B == bj) {
        sigma(j, k) = s.rho_w;
        sigma(k, j) = s.rho_w;
      }
    }
    sigma(j, j) = 1.0;
  }
  return sigma;
}

}  // namespace

SimulatedData simulate_dataset(const SimSetting& setting, Rng& rng) {
  validate_setting(setting);
  Eigen::MatrixXd cov = block_covariance(setting);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-10;  // single jitter retry
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      throw CovarianceNotPSD("simulate_dataset: block covariance for '" +
                             setting.name + "' is not positive definite");
    }
  }
  const Eigen::MatrixXd chol_t = llt.matrixL().transpose();

  SimulatedData out;
  out.beta_star = Eigen::VectorXd::Zero(setting.p);
  for (int j = 1; j < setting.B; j += 2) {  // even 1-based positions
    out.beta_star(j) = setting.tau;
  }

  out.data.X.resize(setting.n, setting.p);
  Eigen::VectorXd z(setting.p);
  for (int i = 0; i < setting.n; ++i) {
    for (int j = 0; j < setting.p; ++j) z(j) = rng.gaussian();
    out.data.X.row(i) = z.transpose() * chol_t;
  }
  out.data.Y = out.data.X * out.beta_star;
  for (int i = 0; i < setting.n; ++i) {
    out.data.Y(i) += setting.sigma * rng.gaussian();
  }
  return out;
}

std::vector<NamedGroup> default_groups(const SimSetting& setting) {
  std::vector<NamedGroup> groups;
  NamedGroup singleton{"singleton_2", {1}};
  NamedGroup half{"block1_first_half", {}};
  for (int j = 0; j < setting.B / 2; ++j) half.indices.push_back(j);
  NamedGroup block{"block1", {}};
  for (int j = 0; j < setting.B; ++j) block.indices.push_back(j);
  NamedGroup null_group{"all_null", {}};
  for (int j = 0; j < setting.p; ++j) {
    const bool signal = j < setting.B && j % 2 == 1;
    if (!signal) null_group.indices.push_back(j);
  }
  groups.push_back(std::move(singleton));
  groups.push_back(std::move(half));
  groups.push_back(std::move(block));
  groups.push_back(std::move(null_group));
  return groups;
}

ExperimentResult run_experiment(const SimSetting& setting,
                                const std::vector<NamedGroup>& groups,
                                int sims, double alpha,
                                Calibration& calibration, std::uint64_t seed,
                                const AggregateOptions& options) {
  validate_setting(setting);
  if (sims < 1) throw std::invalid_argument("run_experiment: sims must be >= 1");
  std::vector<std::vector<int>> plain;
  plain.reserve(groups.size());
  for (const auto& g : groups) plain.push_back(g.indices);

  // Warm the calibration entry before the parallel loop.
  {
    const int n_half = setting.n / 2;
    const int s_eff = options.s > 0
                          ? options.s
                          : std::max(1, std::min({10, setting.p, n_half}));
    calibration.vertex_count(s_eff, alpha * options.epsilon);
  }

  std::vector<std::vector<double>> bounds(
      static_cast<std::size_t>(sims),
      std::vector<double>(groups.size(), 0.0));
  AggregateOptions inner = options;
  inner.threads = 1;
  parallel_for(static_cast<std::size_t>(sims), options.threads,
               [&](std::size_t sim) {
                 Rng rng = Rng::derive(seed, 0x51ull << 32 | sim);
                 const SimulatedData d = simulate_dataset(setting, rng);
                 const auto agg = aggregate_bounds(
                     d.data, plain, alpha, calibration,
                     seed ^ (0x517eull << 40) ^ sim, inner);
                 for (std::size_t gi = 0; gi < agg.size(); ++gi) {
                   bounds[sim][gi] = agg[gi].bound.lower_bound;
                 }
               });

  ExperimentResult result;
  result.setting = setting;
  result.alpha = alpha;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    GroupOutcome o;
    o.group = groups[gi];
    o.sims = sims;
    double sum = 0.0;
    for (int sim = 0; sim < sims; ++sim) {
      const double t = bounds[static_cast<std::size_t>(sim)][gi];
      if (t > kRejectTol) ++o.rejections;
      sum += t;
    }
    o.rate = static_cast<double>(o.rejections) / static_cast<double>(sims);
    o.mean_bound = sum / static_cast<double>(sims);
    result.outcomes.push_back(std::move(o));
  }
  return result;
}

}  // namespace groupbound
