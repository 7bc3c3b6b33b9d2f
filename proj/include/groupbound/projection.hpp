#pragma once

#include <Eigen/Dense>

#include "groupbound/rng.hpp"

namespace groupbound {

/// Orthonormal projection A (s x n) whose row space contains a given signal
/// direction.
struct Projection {
  Eigen::MatrixXd A;  // s x n, orthonormal rows
  int s = 0;
};

/// First row is signal/|signal| (when the signal is nonzero), remaining rows
/// come from Gram-Schmidt on i.i.d. standard Gaussian draws with a
/// re-orthogonalization pass. A degenerate signal (norm < 1e-12) falls back
/// to s random orthonormalized rows. Throws std::invalid_argument for
/// s < 1 or s > n.
Projection build_projection(const Eigen::VectorXd& signal, int s, Rng& rng);

}  // namespace groupbound
