#pragma once

#include <Eigen/Dense>

namespace groupbound::lp {

enum class Status { Optimal, Infeasible, Unbounded };

/// min c'x  subject to  Aeq x = beq,  lower <= x (<= upper).
///
/// `lower` defaults to zero when left empty; `upper` is unbounded when left
/// empty. Free variables are not supported; callers sign-split instead.
struct Problem {
  Eigen::VectorXd c;
  Eigen::MatrixXd Aeq;
  Eigen::VectorXd beq;
  Eigen::VectorXd lower;  // empty => zeros
  Eigen::VectorXd upper;  // empty => +inf

  static Problem standard(Eigen::VectorXd objective, Eigen::MatrixXd a,
                          Eigen::VectorXd b) {
    Problem pb;
    pb.c = std::move(objective);
    pb.Aeq = std::move(a);
    pb.beq = std::move(b);
    return pb;
  }
};

struct Solution {
  Status status = Status::Infeasible;
  double value = 0.0;
  Eigen::VectorXd x;  // size d iff Optimal
  int iterations = 0;
};

struct Options {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  int max_iter_factor = 50;  // cap = factor * (columns + rows)
};

/// Two-phase primal simplex on a dense tableau with Bland's rule.
/// Throws DimensionMismatch on malformed input and NumericalFailure when the
/// iteration cap is exhausted.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace groupbound::lp
