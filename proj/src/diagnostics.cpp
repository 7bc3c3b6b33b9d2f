#include "groupbound/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "groupbound/errors.hpp"
#include "groupbound/rng.hpp"

namespace groupbound {

SparsityPattern SparsityPattern::from_vector(const Eigen::VectorXd& beta,
                                             double tol) {
  SparsityPattern p;
  for (int j = 0; j < beta.size(); ++j) {
    if (std::abs(beta(j)) > tol) {
      p.S0.push_back(j);
      p.signs.push_back(beta(j) > 0.0 ? 1 : -1);
    }
  }
  return p;
}

namespace {

std::vector<bool> member_mask(const std::vector<int>& idx, int p) {
  std::vector<bool> mask(static_cast<std::size_t>(p), false);
  for (int j : idx) {
    if (j < 0 || j >= p) {
      throw DimensionMismatch("diagnostics: index out of range [0, " +
                              std::to_string(p) + ")");
    }
    mask[static_cast<std::size_t>(j)] = true;
  }
  return mask;
}

double l1_over(const Eigen::VectorXd& beta, const std::vector<bool>& mask) {
  double sum = 0.0;
  for (int j = 0; j < beta.size(); ++j) {
    if (mask[static_cast<std::size_t>(j)]) sum += std::abs(beta(j));
  }
  return sum;
}

}  // namespace

double nu_g(const SparsityPattern& pattern, const std::vector<int>& G,
            const Eigen::VectorXd& beta) {
  const int p = static_cast<int>(beta.size());
  std::vector<int> sign_of(static_cast<std::size_t>(p), 0);
  for (std::size_t i = 0; i < pattern.S0.size(); ++i) {
    sign_of[static_cast<std::size_t>(pattern.S0[i])] = pattern.signs[i];
  }
  double value = 0.0;
  for (int k : G) {
    if (k < 0 || k >= p) {
      throw DimensionMismatch("nu_g: group index out of range");
    }
    const int sg = sign_of[static_cast<std::size_t>(k)];
    // Free coordinates take the subgradient entry -sign(beta_k).
    value += sg != 0 ? sg * beta(k) : -std::abs(beta(k));
  }
  return value;
}

bool cc_feasible(const SparsityPattern& pattern, double L,
                 const Eigen::VectorXd& beta, double tol) {
  const int p = static_cast<int>(beta.size());
  const auto s0 = member_mask(pattern.S0, p);
  auto s0c = s0;
  s0c.flip();
  const double on = l1_over(beta, s0);
  const double off = l1_over(beta, s0c);
  return on >= 1.0 - tol && off <= L * on + tol;
}

bool gcc_feasible(const SparsityPattern& pattern, const std::vector<int>& G,
                  double L, const Eigen::VectorXd& beta, double tol) {
  const int p = static_cast<int>(beta.size());
  const auto s0 = member_mask(pattern.S0, p);
  const auto g = member_mask(G, p);
  double off_in_g = 0.0, off_out_g = 0.0;
  for (int j = 0; j < p; ++j) {
    if (s0[static_cast<std::size_t>(j)]) continue;
    (g[static_cast<std::size_t>(j)] ? off_in_g : off_out_g) +=
        std::abs(beta(j));
  }
  const double on = l1_over(beta, s0);
  return nu_g(pattern, G, beta) >= 1.0 - tol &&
         off_out_g <= L * (on - off_in_g) + tol;
}

bool gcc_feasible_implies_cc_feasible(const SparsityPattern& pattern,
                                      const std::vector<int>& G, double L,
                                      const Eigen::VectorXd& beta) {
  if (!gcc_feasible(pattern, G, L, beta)) return false;
  // Feasible-set inclusion; a violation would contradict the definitions.
  if (!cc_feasible(pattern, L, beta, 1e-9)) {
    throw NumericalFailure(
        "gcc_feasible_implies_cc_feasible: inclusion violated");
  }
  return true;
}

// ---------------------------------------------------------------------------
// Projected-gradient estimators
// ---------------------------------------------------------------------------

namespace {

// Euclidean projection onto the probability simplex {z >= 0, sum z = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& z) {
  const int n = static_cast<int>(z.size());
  std::vector<double> u(z.data(), z.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0;
  double theta = 0.0;
  for (int i = 0; i < n; ++i) {
    cssv += u[static_cast<std::size_t>(i)];
    const double t = (cssv - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0.0) theta = t;
  }
  return (z.array() - theta).max(0.0);
}

// Euclidean projection onto the l1 ball of radius r.
Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& w, double r) {
  if (w.cwiseAbs().sum() <= r) return w;
  if (r <= 0.0) return Eigen::VectorXd::Zero(w.size());
  const Eigen::VectorXd absw = w.cwiseAbs();
  const Eigen::VectorXd shrunk = project_simplex(absw / r) * r;
  // project_simplex(|w|/r)*r solves the scaled problem; recover signs.
  Eigen::VectorXd out(w.size());
  for (int i = 0; i < w.size(); ++i) {
    out(i) = std::copysign(shrunk(i), w(i));
  }
  return out;
}

double operator_norm_sq(const Eigen::MatrixXd& X) {
  // Largest eigenvalue of X'X by power iteration (deterministic start).
  const int p = static_cast<int>(X.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(p) / std::sqrt(double(p));
  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd w = X.transpose() * (X * v);
    const double norm = w.norm();
    if (norm < 1e-300) return 0.0;
    v = w / norm;
    lambda = norm;
  }
  return lambda;
}

// Enumerated or sampled sign patterns over S0.
std::vector<std::vector<int>> sign_patterns(int s0, const PhiOptions& opt,
                                            Rng& rng) {
  std::vector<std::vector<int>> out;
  if (s0 <= 10) {
    const int count = 1 << s0;
    out.reserve(static_cast<std::size_t>(count));
    for (int mask = 0; mask < count; ++mask) {
      std::vector<int> sg(static_cast<std::size_t>(s0));
      for (int i = 0; i < s0; ++i) sg[static_cast<std::size_t>(i)] =
          (mask >> i) & 1 ? -1 : 1;
      out.push_back(std::move(sg));
    }
  } else {
    out.reserve(static_cast<std::size_t>(opt.max_patterns));
    for (int t = 0; t < opt.max_patterns; ++t) {
      std::vector<int> sg(static_cast<std::size_t>(s0));
      for (int i = 0; i < s0; ++i) {
        sg[static_cast<std::size_t>(i)] = rng.uniform() < 0.5 ? 1 : -1;
      }
      out.push_back(std::move(sg));
    }
  }
  return out;
}

}  // namespace

CompatEstimate estimate_phi_cc(const Eigen::MatrixXd& X,
                               const SparsityPattern& pattern, double L,
                               const PhiOptions& opt) {
  const int p = static_cast<int>(X.cols());
  const int s0 = static_cast<int>(pattern.S0.size());
  if (s0 == 0) throw std::invalid_argument("estimate_phi_cc: empty S0");
  std::vector<int> rest;
  {
    const auto mask = member_mask(pattern.S0, p);
    for (int j = 0; j < p; ++j) {
      if (!mask[static_cast<std::size_t>(j)]) rest.push_back(j);
    }
  }
  const int pr = static_cast<int>(rest.size());

  const double scale = static_cast<double>(s0);
  const double lip = 2.0 * scale * operator_norm_sq(X) + 1e-12;
  const double step = 1.0 / lip;

  Rng rng(opt.seed);
  const auto patterns = sign_patterns(s0, opt, rng);

  auto assemble = [&](const std::vector<int>& sg, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& w) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < s0; ++i) {
      beta(pattern.S0[static_cast<std::size_t>(i)]) =
          sg[static_cast<std::size_t>(i)] * z(i);
    }
    for (int i = 0; i < pr; ++i) beta(rest[static_cast<std::size_t>(i)]) = w(i);
    return beta;
  };

  CompatEstimate est;
  est.L = L;
  est.restarts = opt.restarts;
  est.value = std::numeric_limits<double>::infinity();
  bool best_converged = false;

  for (const auto& sg : patterns) {
    for (int start = 0; start < opt.restarts; ++start) {
      Eigen::VectorXd z(s0), w(pr);
      if (start == 0) {
        z.setConstant(1.0 / scale);
        w.setZero();
      } else {
        for (int i = 0; i < s0; ++i) z(i) = std::abs(rng.gaussian());
        z = project_simplex(z);
        for (int i = 0; i < pr; ++i) w(i) = rng.gaussian();
        w = project_l1_ball(w, L * rng.uniform());
      }
      bool run_converged = false;
      for (int it = 0; it < opt.max_iters; ++it) {
        const Eigen::VectorXd beta = assemble(sg, z, w);
        const Eigen::VectorXd grad = 2.0 * scale * (X.transpose() * (X * beta));
        Eigen::VectorXd gz(s0), gw(pr);
        for (int i = 0; i < s0; ++i) {
          gz(i) = sg[static_cast<std::size_t>(i)] *
                  grad(pattern.S0[static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i < pr; ++i) {
          gw(i) = grad(rest[static_cast<std::size_t>(i)]);
        }
        const Eigen::VectorXd z_new = project_simplex(z - step * gz);
        const Eigen::VectorXd w_new =
            pr > 0 ? project_l1_ball(w - step * gw, L) : w;
        const double move =
            (z_new - z).lpNorm<Eigen::Infinity>() +
            (pr > 0 ? (w_new - w).lpNorm<Eigen::Infinity>() : 0.0);
        z = z_new;
        w = w_new;
        if (move < opt.step_tol) {
          run_converged = true;
          break;
        }
      }
      const Eigen::VectorXd beta = assemble(sg, z, w);
      const double value = scale * (X * beta).squaredNorm();
      if (value < est.value) {
        est.value = value;
        best_converged = run_converged;
      }
    }
  }
  est.converged = best_converged;
  return est;
}

namespace {

// One halfspace {a.x >= c} (flip sign for <=) with closed-form projection.
struct Halfspace {
  Eigen::VectorXd a;
  double c = 0.0;

  Eigen::VectorXd project(const Eigen::VectorXd& x) const {
    const double g = a.dot(x) - c;
    if (g >= 0.0) return x;
    return x - g * a / a.squaredNorm();
  }
};

// Dykstra's alternating projection onto box {x>=0} and two halfspaces.
Eigen::VectorXd dykstra(const Eigen::VectorXd& x0, const Halfspace& h1,
                        const Halfspace& h2, int cycles) {
  Eigen::VectorXd x = x0;
  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd p1 = p0, p2 = p0;
  for (int it = 0; it < cycles; ++it) {
    Eigen::VectorXd y = (x + p0).cwiseMax(0.0);
    p0 = x + p0 - y;
    Eigen::VectorXd y1 = h1.project(y + p1);
    p1 = y + p1 - y1;
    Eigen::VectorXd y2 = h2.project(y1 + p2);
    p2 = y1 + p2 - y2;
    if ((y2 - x).lpNorm<Eigen::Infinity>() < 1e-14) {
      x = y2;
      break;
    }
    x = y2;
  }
  return x;
}

}  // namespace

CompatEstimate estimate_phi_gcc(const Eigen::MatrixXd& X,
                                const SparsityPattern& pattern,
                                const std::vector<int>& G, double L,
                                const PhiOptions& opt) {
  const int p = static_cast<int>(X.cols());
  const int s0 = static_cast<int>(pattern.S0.size());
  if (s0 == 0) throw std::invalid_argument("estimate_phi_gcc: empty S0");
  const auto s0_mask = member_mask(pattern.S0, p);
  const auto g_mask = member_mask(G, p);

  std::vector<int> rest;
  for (int j = 0; j < p; ++j) {
    if (!s0_mask[static_cast<std::size_t>(j)]) rest.push_back(j);
  }
  const int pr = static_cast<int>(rest.size());
  const int dim = s0 + 2 * pr;  // z on S0, then u, v for the complement

  const double scale = static_cast<double>(s0);
  const double lip = 6.0 * scale * operator_norm_sq(X) + 1e-12;
  const double step = 1.0 / lip;

  Rng rng(opt.seed + 1);
  const auto patterns = sign_patterns(s0, opt, rng);

  auto assemble = [&](const std::vector<int>& sg,
                      const Eigen::VectorXd& x) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < s0; ++i) {
      beta(pattern.S0[static_cast<std::size_t>(i)]) =
          sg[static_cast<std::size_t>(i)] * x(i);
    }
    for (int i = 0; i < pr; ++i) {
      beta(rest[static_cast<std::size_t>(i)]) = x(s0 + i) - x(s0 + pr + i);
    }
    return beta;
  };

  CompatEstimate est;
  est.L = L;
  est.restarts = opt.restarts;
  est.value = std::numeric_limits<double>::infinity();
  bool best_converged = false;

  for (const auto& sg : patterns) {
    // nu_G(beta) >= 1 in lifted coordinates.
    Halfspace h_nu;
    h_nu.a = Eigen::VectorXd::Zero(dim);
    h_nu.c = 1.0;
    for (int i = 0; i < s0; ++i) {
      if (g_mask[static_cast<std::size_t>(
              pattern.S0[static_cast<std::size_t>(i)])]) {
        h_nu.a(i) = static_cast<double>(
            pattern.signs[static_cast<std::size_t>(i)] *
            sg[static_cast<std::size_t>(i)]);
      }
    }
    for (int i = 0; i < pr; ++i) {
      if (g_mask[static_cast<std::size_t>(rest[static_cast<std::size_t>(i)])]) {
        h_nu.a(s0 + i) = -1.0;
        h_nu.a(s0 + pr + i) = -1.0;
      }
    }
    // |beta_{Gc off S0}|_1 + L |beta_{G off S0}|_1 <= L |beta_{S0}|_1,
    // written as a.x >= 0 in lifted coordinates.
    Halfspace h_cone;
    h_cone.a = Eigen::VectorXd::Zero(dim);
    h_cone.c = 0.0;
    for (int i = 0; i < s0; ++i) h_cone.a(i) = L;
    for (int i = 0; i < pr; ++i) {
      const bool in_g =
          g_mask[static_cast<std::size_t>(rest[static_cast<std::size_t>(i)])];
      h_cone.a(s0 + i) = in_g ? -L : -1.0;
      h_cone.a(s0 + pr + i) = in_g ? -L : -1.0;
    }

    if (h_nu.a.lpNorm<Eigen::Infinity>() == 0.0) continue;  // nu <= 0 always
    // Deterministic feasible seed: unit mass on a +1 coefficient in G of S0.
    int seed_coord = -1;
    for (int i = 0; i < s0; ++i) {
      if (h_nu.a(i) > 0.0) {
        seed_coord = i;
        break;
      }
    }
    if (seed_coord < 0) continue;  // this pattern cannot reach nu >= 1

    for (int start = 0; start < opt.restarts; ++start) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
      x(seed_coord) = 1.0;
      if (start > 0) {
        for (int i = 0; i < dim; ++i) {
          x(i) += 0.5 * std::abs(rng.gaussian());
        }
        x = dykstra(x, h_nu, h_cone, 300);
      }
      bool run_converged = false;
      for (int it = 0; it < opt.max_iters; ++it) {
        const Eigen::VectorXd beta = assemble(sg, x);
        const Eigen::VectorXd grad = 2.0 * scale * (X.transpose() * (X * beta));
        Eigen::VectorXd gx(dim);
        for (int i = 0; i < s0; ++i) {
          gx(i) = sg[static_cast<std::size_t>(i)] *
                  grad(pattern.S0[static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i < pr; ++i) {
          const double gj = grad(rest[static_cast<std::size_t>(i)]);
          gx(s0 + i) = gj;
          gx(s0 + pr + i) = -gj;
        }
        const Eigen::VectorXd x_new = dykstra(x - step * gx, h_nu, h_cone, 60);
        const double move = (x_new - x).lpNorm<Eigen::Infinity>();
        x = x_new;
        if (move < opt.step_tol) {
          run_converged = true;
          break;
        }
      }
      // Exact feasibility repair: clamp, fix the cone constraint by adding
      // mass on the seed coordinate, then rescale so nu = 1 exactly.
      x = x.cwiseMax(0.0);
      const double cone_gap = h_cone.a.dot(x);
      if (cone_gap < 0.0) x(seed_coord) += -cone_gap / L;
      const double nu_val = h_nu.a.dot(x);
      if (nu_val <= 1e-12) continue;
      x /= nu_val;
      const Eigen::VectorXd beta = assemble(sg, x);
      const double value = scale * (X * beta).squaredNorm();
      if (value < est.value) {
        est.value = value;
        best_converged = run_converged;
      }
    }
  }
  est.converged = best_converged;
  return est;
}

}  // namespace groupbound
