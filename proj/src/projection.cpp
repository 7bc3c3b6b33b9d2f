#include "groupbound/projection.hpp"

#include <stdexcept>
#include <string>

#include "groupbound/errors.hpp"

namespace groupbound {

Projection build_projection(const Eigen::VectorXd& signal, int s, Rng& rng) {
  const int n = static_cast<int>(signal.size());
  if (s < 1 || s > n) {
    throw std::invalid_argument("build_projection: need 1 <= s <= n, got s=" +
                                std::to_string(s) + " n=" + std::to_string(n));
  }

  Projection proj;
  proj.s = s;
  proj.A.resize(s, n);

  int row = 0;
  const double signal_norm = signal.norm();
  if (signal_norm >= 1e-12) {
    proj.A.row(row++) = signal.transpose() / signal_norm;
  }

  Eigen::VectorXd v(n);
  int attempts = 0;
  while (row < s) {
    if (++attempts > 200 * s) {
      throw NumericalFailure("build_projection: repeated degenerate draws");
    }
    for (int i = 0; i < n; ++i) v(i) = rng.gaussian();
    // Gram-Schmidt with one re-orthogonalization pass.
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < row; ++k) {
        v -= proj.A.row(k).dot(v) * proj.A.row(k).transpose();
      }
    }
    const double res = v.norm();
    if (res < 1e-10) continue;  // near-dependent draw, reject and redraw
    proj.A.row(row++) = v.transpose() / res;
  }
  return proj;
}

}  // namespace groupbound
