#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "groupbound/rng.hpp"

namespace groupbound {

/// Convex hull of 2m sign-paired random unit vectors, scaled by mu.
/// Column 2k is e^(k), column 2k+1 is -e^(k) (0-based).
struct NoiseRegion {
  Eigen::MatrixXd E;  // dim x 2m, unit-norm columns
  double mu = 0.0;
  int m = 0;

  int dim() const { return static_cast<int>(E.rows()); }
};

/// m draws from the unit sphere (normalized standard Gaussians), each paired
/// with its negation.
NoiseRegion sample_region(int dim, int m, double mu, Rng& rng);

/// Hull membership: true iff eta = mu * E * gamma for some gamma >= 0 with
/// sum(gamma) <= 1 + 1e-9. Decided by an LP feasibility/optimality check.
bool contains(const NoiseRegion& region, const Eigen::VectorXd& eta);

/// Surrogate radius of Section "unknown noise level":
/// sqrt(|eps|^2) when eps_1 >= 0, else sqrt(|eps|^2 - eps_1^2).
double mu_star(const Eigen::VectorXd& eps);

struct CalibrationEntry {
  int dim = 0;
  double alpha = 0.0;
  int m = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  double achieved_coverage = 0.0;
};

struct CalibrateOptions {
  double scale_constant = 3.0;  // the factor C in mu = C * mu_star
  int m_cap = 0;                // 0 => default 1e6 / dim
  unsigned threads = 1;
};

/// Smallest m such that the Monte Carlo estimate over `reps` draws of
/// P(eps in N_{m, C*mu_star(eps)}) reaches 1 - alpha, with eps standard
/// Gaussian and a fresh region per draw. Replicate streams derive from
/// (seed, replicate); vertex draws nest across m so per-replicate hull
/// membership is monotone in m and the doubling/bisection search is exact
/// for the sampled replicates. Throws CalibrationDiverged past the cap.
CalibrationEntry calibrate_m(int dim, double alpha, int reps,
                             std::uint64_t seed,
                             const CalibrateOptions& options = {});

/// One Monte Carlo coverage estimate at fixed m (exposed for tests).
double estimate_coverage(int dim, int m, int reps, std::uint64_t seed,
                         const CalibrateOptions& options = {});

}  // namespace groupbound
