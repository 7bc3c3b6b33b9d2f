#include "groupbound/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "groupbound/errors.hpp"

namespace groupbound {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// In-place coordinate descent at a single lambda. `residual` enters and
// leaves consistent with beta.
void descend(const Eigen::MatrixXd& X, Eigen::VectorXd& beta,
             Eigen::VectorXd& residual, const Eigen::VectorXd& col_sq,
             double lambda, const LassoOptions& opt, int lambda_index) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (col_sq(j) <= 0.0) continue;  // constant-zero column stays at 0
      const double old = beta(j);
      const double rho = X.col(j).dot(residual) / static_cast<double>(n) +
                         col_sq(j) * old;
      const double updated = soft_threshold(rho, lambda) / col_sq(j);
      if (updated != old) {
        residual += X.col(j) * (old - updated);
        beta(j) = updated;
        max_delta = std::max(max_delta, std::abs(updated - old));
      }
    }
    if (max_delta < opt.tol) return;
  }
  throw NonConvergence("lasso: no convergence at lambda index " +
                       std::to_string(lambda_index));
}

}  // namespace

std::vector<Eigen::VectorXd> lasso_path(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        const std::vector<double>& lambdas,
                                        const LassoOptions& options) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) {
    throw DimensionMismatch("lasso_path: y length does not match X rows");
  }
  if (lambdas.empty()) {
    throw std::invalid_argument("lasso_path: empty lambda sequence");
  }
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (!(lambdas[i] < lambdas[i - 1])) {
      throw std::invalid_argument(
          "lasso_path: lambdas must be strictly descending");
    }
  }
  if (lambdas.back() < 0.0) {
    throw std::invalid_argument("lasso_path: negative lambda");
  }

  Eigen::VectorXd col_sq(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    col_sq(j) = X.col(j).squaredNorm() / static_cast<double>(n);
  }

  std::vector<Eigen::VectorXd> path;
  path.reserve(lambdas.size());
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd residual = y;
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    descend(X, beta, residual, col_sq, lambdas[i], options,
            static_cast<int>(i));
    path.push_back(beta);
  }
  return path;
}

namespace {

struct Standardized {
  Eigen::MatrixXd X;          // centered and unit-variance columns
  Eigen::VectorXd y;          // centered
  Eigen::RowVectorXd means;
  Eigen::RowVectorXd scales;  // 1 for constant columns
  double y_mean = 0.0;
};

Standardized standardize(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Standardized s;
  const Eigen::Index n = X.rows();
  s.means = X.colwise().mean();
  s.X = X.rowwise() - s.means;
  s.scales.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double sd =
        std::sqrt(s.X.col(j).squaredNorm() / static_cast<double>(n));
    s.scales(j) = sd > 1e-12 ? sd : 1.0;
    s.X.col(j) /= s.scales(j);
  }
  s.y_mean = y.mean();
  s.y = y.array() - s.y_mean;
  return s;
}

std::vector<double> lambda_grid(const Standardized& s,
                                const LassoOptions& opt) {
  const double n = static_cast<double>(s.X.rows());
  double lambda_max =
      (s.X.transpose() * s.y).cwiseAbs().maxCoeff() / n;
  if (lambda_max <= 0.0) lambda_max = 1.0;  // pure-constant design
  std::vector<double> grid(static_cast<std::size_t>(opt.n_lambda));
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * opt.lambda_min_ratio);
  for (int i = 0; i < opt.n_lambda; ++i) {
    const double f = opt.n_lambda == 1
                         ? 0.0
                         : static_cast<double>(i) /
                               static_cast<double>(opt.n_lambda - 1);
    grid[static_cast<std::size_t>(i)] =
        std::exp(log_max + f * (log_min - log_max));
  }
  return grid;
}

}  // namespace

LassoFit cv_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  int folds, Rng& rng, const LassoOptions& options) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (y.size() != n) {
    throw DimensionMismatch("cv_lasso: y length does not match X rows");
  }
  if (folds < 2 || folds > n) {
    throw std::invalid_argument("cv_lasso: need 2 <= folds <= n");
  }

  const Standardized full = standardize(X, y);
  const std::vector<double> grid = lambda_grid(full, options);

  // Random fold assignment: shuffled indices dealt round-robin.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) {
    fold_of[static_cast<std::size_t>(order[i])] =
        static_cast<int>(i % static_cast<std::size_t>(folds));
  }

  std::vector<double> cv_error(grid.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> train, test;
    for (int i = 0; i < n; ++i) {
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    }
    Eigen::MatrixXd Xtr(train.size(), p), Xte(test.size(), p);
    Eigen::VectorXd ytr(train.size()), yte(test.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      Xtr.row(static_cast<Eigen::Index>(i)) = X.row(train[i]);
      ytr(static_cast<Eigen::Index>(i)) = y(train[i]);
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      Xte.row(static_cast<Eigen::Index>(i)) = X.row(test[i]);
      yte(static_cast<Eigen::Index>(i)) = y(test[i]);
    }

    const Standardized st = standardize(Xtr, ytr);
    const auto path = lasso_path(st.X, st.y, grid, options);
    for (std::size_t li = 0; li < grid.size(); ++li) {
      // Back to original scale for held-out prediction.
      const Eigen::VectorXd b =
          path[li].array() / st.scales.transpose().array();
      const double b0 = st.y_mean - st.means * b;
      const Eigen::VectorXd pred = (Xte * b).array() + b0;
      cv_error[li] += (pred - yte).squaredNorm() /
                      static_cast<double>(test.size());
    }
  }
  for (auto& e : cv_error) e /= static_cast<double>(folds);

  std::size_t best = 0;
  for (std::size_t li = 1; li < grid.size(); ++li) {
    if (cv_error[li] < cv_error[best]) best = li;
  }

  const auto full_path = lasso_path(full.X, full.y, grid, options);
  LassoFit fit;
  fit.lambda = grid[best];
  fit.coefficients = full_path[best].array() / full.scales.transpose().array();
  fit.intercept = full.y_mean - full.means * fit.coefficients;
  fit.cv_curve.reserve(grid.size());
  for (std::size_t li = 0; li < grid.size(); ++li) {
    fit.cv_curve.emplace_back(grid[li], cv_error[li]);
  }
  return fit;
}

}  // namespace groupbound
