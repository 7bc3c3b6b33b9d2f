#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "groupbound/rng.hpp"

namespace groupbound {

struct LassoOptions {
  double tol = 1e-7;       // max coefficient change per sweep
  int max_sweeps = 10000;
  int n_lambda = 100;
  double lambda_min_ratio = 1e-3;
};

struct LassoFit {
  Eigen::VectorXd coefficients;  // original scale
  double lambda = 0.0;
  double intercept = 0.0;
  std::vector<std::pair<double, double>> cv_curve;  // (lambda, mean CV error)
};

/// Coordinate-descent path for (1/2n)|y - X b|^2 + lambda |b|_1 on the data
/// exactly as given (no centering or rescaling; callers standardize).
/// Solutions are warm-started along the strictly descending lambda sequence.
/// Throws NonConvergence (with the lambda index) past the sweep cap.
std::vector<Eigen::VectorXd> lasso_path(const Eigen::MatrixXd& X,
                                        const Eigen::VectorXd& y,
                                        const std::vector<double>& lambdas,
                                        const LassoOptions& options = {});

/// K-fold cross-validated lasso: columns standardized internally, intercept
/// fit by centering, lambda grid of n_lambda log-spaced values from
/// lambda_max down to lambda_min_ratio * lambda_max, selection by minimum
/// mean CV prediction error, refit on all rows at the selected lambda.
LassoFit cv_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                  int folds, Rng& rng, const LassoOptions& options = {});

}  // namespace groupbound
