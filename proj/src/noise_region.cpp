#include "groupbound/noise_region.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "groupbound/errors.hpp"
#include "groupbound/lp.hpp"
#include "groupbound/parallel.hpp"

namespace groupbound {

NoiseRegion sample_region(int dim, int m, double mu, Rng& rng) {
  if (dim <= 0) throw std::invalid_argument("sample_region: dim must be >= 1");
  if (m <= 0) throw std::invalid_argument("sample_region: m must be >= 1");
  if (mu < 0.0) throw std::invalid_argument("sample_region: mu must be >= 0");

  NoiseRegion region;
  region.mu = mu;
  region.m = m;
  region.E.resize(dim, 2 * m);
  Eigen::VectorXd v(dim);
  for (int k = 0; k < m; ++k) {
    double norm = 0.0;
    do {
      for (int i = 0; i < dim; ++i) v(i) = rng.gaussian();
      norm = v.norm();
    } while (norm < 1e-300);
    v /= norm;
    region.E.col(2 * k) = v;
    region.E.col(2 * k + 1) = -v;
  }
  return region;
}

bool contains(const NoiseRegion& region, const Eigen::VectorXd& eta) {
  const int dim = region.dim();
  if (eta.size() != dim) {
    throw DimensionMismatch("contains: eta length " +
                            std::to_string(eta.size()) +
                            " does not match region dimension " +
                            std::to_string(dim));
  }
  if (region.mu <= 0.0) return eta.lpNorm<Eigen::Infinity>() <= 1e-12;

  // Hull vertices lie on the radius-mu sphere, so anything outside the ball
  // is out without solving.
  if (eta.norm() > region.mu * (1.0 + 1e-9)) return false;

  lp::Problem pb;
  pb.c = Eigen::VectorXd::Ones(2 * region.m);
  pb.Aeq = region.E;
  pb.beq = eta / region.mu;
  const lp::Solution sol = lp::solve(pb);
  return sol.status == lp::Status::Optimal && sol.value <= 1.0 + 1e-9;
}

double mu_star(const Eigen::VectorXd& eps) {
  if (eps.size() == 0) throw std::invalid_argument("mu_star: empty vector");
  const double sq = eps.squaredNorm();
  if (eps(0) >= 0.0) return std::sqrt(sq);
  return std::sqrt(std::max(0.0, sq - eps(0) * eps(0)));
}

namespace {

// One replicate: fresh eps, mu = C * mu_star(eps), fresh vertices. The same
// stream is reused for every m, so vertex draws are nested and the hit
// indicator is monotone in m replicate by replicate.
bool replicate_hit(int dim, int m, double c_scale, Rng rng) {
  Eigen::VectorXd eps(dim);
  for (int i = 0; i < dim; ++i) eps(i) = rng.gaussian();
  const double mu = c_scale * mu_star(eps);
  const NoiseRegion region = sample_region(dim, m, std::max(mu, 1e-300), rng);
  return mu > 0.0 && contains(region, eps);
}

}  // namespace

double estimate_coverage(int dim, int m, int reps, std::uint64_t seed,
                         const CalibrateOptions& options) {
  std::atomic<int> hits{0};
  parallel_for(static_cast<std::size_t>(reps), options.threads,
               [&](std::size_t rep) {
                 if (replicate_hit(dim, m, options.scale_constant,
                                   Rng::derive(seed, rep))) {
                   hits.fetch_add(1, std::memory_order_relaxed);
                 }
               });
  return static_cast<double>(hits.load()) / static_cast<double>(reps);
}

CalibrationEntry calibrate_m(int dim, double alpha, int reps,
                             std::uint64_t seed,
                             const CalibrateOptions& options) {
  if (dim <= 0) throw std::invalid_argument("calibrate_m: dim must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("calibrate_m: alpha must be in (0,1)");
  }
  if (reps < 1) throw std::invalid_argument("calibrate_m: reps must be >= 1");

  const int cap =
      options.m_cap > 0 ? options.m_cap : std::max(1, 1000000 / dim);
  const double target = 1.0 - alpha;

  // Double until covered, then bisect; the nested vertex streams make the
  // per-replicate indicator monotone in m, so the bracket cannot disagree.
  int lo = 0;  // largest m known not to cover (0 = none)
  int hi = -1;
  double hi_cov = 0.0;
  for (int m = dim; m <= cap; m *= 2) {
    const double cov = estimate_coverage(dim, m, reps, seed, options);
    if (cov >= target) {
      hi = m;
      hi_cov = cov;
      break;
    }
    lo = m;
  }
  if (hi < 0) {
    throw CalibrationDiverged("calibrate_m: coverage target " +
                              std::to_string(target) +
                              " not reached at m cap " + std::to_string(cap));
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    const double cov = estimate_coverage(dim, mid, reps, seed, options);
    if (cov >= target) {
      hi = mid;
      hi_cov = cov;
    } else {
      lo = mid;
    }
  }

  CalibrationEntry entry;
  entry.dim = dim;
  entry.alpha = alpha;
  entry.m = hi;
  entry.reps = reps;
  entry.seed = seed;
  entry.achieved_coverage = hi_cov;
  return entry;
}

}  // namespace groupbound
