#include "groupbound/basis_pursuit.hpp"

#include <string>

#include "groupbound/errors.hpp"

namespace groupbound {

BasisPursuitResult basis_pursuit(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y,
                                 const lp::Options& options) {
  const Eigen::Index r = X.rows();
  const Eigen::Index d = X.cols();
  if (y.size() != r) {
    throw DimensionMismatch("basis_pursuit: X has " + std::to_string(r) +
                            " rows, y has " + std::to_string(y.size()));
  }

  lp::Problem pb;
  pb.c = Eigen::VectorXd::Ones(2 * d);
  pb.Aeq.resize(r, 2 * d);
  pb.Aeq << X, -X;
  pb.beq = y;

  const lp::Solution sol = lp::solve(pb, options);
  if (sol.status == lp::Status::Infeasible) {
    throw InfeasibleSystem("basis_pursuit: system X beta = y has no solution");
  }
  if (sol.status != lp::Status::Optimal) {
    throw NumericalFailure("basis_pursuit: unexpected LP status");
  }

  BasisPursuitResult out;
  out.beta = sol.x.head(d) - sol.x.tail(d);
  out.l1_norm = sol.value;
  return out;
}

}  // namespace groupbound
