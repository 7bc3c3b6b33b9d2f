#pragma once

#include <Eigen/Dense>

#include "groupbound/lp.hpp"

namespace groupbound {

struct BasisPursuitResult {
  Eigen::VectorXd beta;
  double l1_norm = 0.0;
};

/// Minimum-l1-norm solution of X beta = y via the sign-split LP
/// min sum(bp + bm) s.t. X(bp - bm) = y, bp, bm >= 0.
///
/// When the minimizer is not unique an arbitrary optimal vertex is returned.
/// Throws InfeasibleSystem when no beta satisfies the system.
BasisPursuitResult basis_pursuit(const Eigen::MatrixXd& X,
                                 const Eigen::VectorXd& y,
                                 const lp::Options& options = {});

}  // namespace groupbound
