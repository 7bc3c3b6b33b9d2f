#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace groupbound {

/// Support and signs of the target coefficient vector.
struct SparsityPattern {
  std::vector<int> S0;     // sorted 0-based indices of nonzero coefficients
  std::vector<int> signs;  // +1 / -1, aligned with S0

  static SparsityPattern from_vector(const Eigen::VectorXd& beta,
                                     double tol = 0.0);
};

/// Signed group contribution minimized over the l1 subgradient set at the
/// target: sum_{k in G of S0} sign_k beta_k - sum_{k in G off S0} |beta_k|.
double nu_g(const SparsityPattern& pattern, const std::vector<int>& G,
            const Eigen::VectorXd& beta);

struct CompatEstimate {
  double value = 0.0;  // upper bound on the squared constant
  double L = 0.0;
  int restarts = 0;
  bool converged = false;
};

struct PhiOptions {
  int restarts = 6;         // starts per sign pattern
  int max_iters = 2000;     // projected-gradient steps per start
  int max_patterns = 64;    // sampled sign patterns when |S0| > 10
  double step_tol = 1e-11;  // stop when the iterate stalls
  std::uint64_t seed = 17;
};

/// Upper bound on phi_cc^2(L): minimum of |S0| |X beta|^2 over the
/// compatibility feasible set, explored one sign pattern of beta_{S0} at a
/// time (the normalization |beta_{S0}|_1 = 1 holds at any optimum by
/// homogeneity). Each pattern is a convex piece solved by projected gradient
/// with multi-start; the best feasible value found is reported.
CompatEstimate estimate_phi_cc(const Eigen::MatrixXd& X,
                               const SparsityPattern& pattern, double L,
                               const PhiOptions& options = {});

/// Same scheme for phi_gcc^2(L, G) with the nu_G(beta) >= 1 normalization.
/// Returns +infinity when every sign pattern is infeasible (empty feasible
/// set, e.g. G disjoint from S0).
CompatEstimate estimate_phi_gcc(const Eigen::MatrixXd& X,
                                const SparsityPattern& pattern,
                                const std::vector<int>& G, double L,
                                const PhiOptions& options = {});

/// True iff beta lies in the group-effect feasible set; in that case the
/// compatibility feasible set must contain it too (feasible-set inclusion),
/// which is verified and reported through the return path of the callers'
/// asserts. Throws NumericalFailure if the inclusion ever fails.
bool gcc_feasible_implies_cc_feasible(const SparsityPattern& pattern,
                                      const std::vector<int>& G, double L,
                                      const Eigen::VectorXd& beta);

/// The two raw feasibility predicates (exposed for property tests).
bool cc_feasible(const SparsityPattern& pattern, double L,
                 const Eigen::VectorXd& beta, double tol = 1e-12);
bool gcc_feasible(const SparsityPattern& pattern, const std::vector<int>& G,
                  double L, const Eigen::VectorXd& beta, double tol = 1e-12);

}  // namespace groupbound
