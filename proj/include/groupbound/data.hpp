#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "groupbound/errors.hpp"

namespace groupbound {

/// Design matrix X (rows = observations) paired with the response Y.
struct RegressionData {
  Eigen::MatrixXd X;
  Eigen::VectorXd Y;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }

  /// Throws on shape inconsistency or non-finite entries.
  void validate() const {
    if (X.rows() < 1 || X.cols() < 1) {
      throw DimensionMismatch("RegressionData: need n >= 1 and p >= 1");
    }
    if (Y.size() != X.rows()) {
      throw DimensionMismatch("RegressionData: Y length " +
                              std::to_string(Y.size()) +
                              " does not match X rows " +
                              std::to_string(X.rows()));
    }
    if (!X.allFinite() || !Y.allFinite()) {
      throw DimensionMismatch("RegressionData: non-finite entries");
    }
  }

  /// Rows of X and Y selected by `rows` (0-based), in the given order.
  RegressionData subset(const std::vector<int>& rows) const {
    RegressionData out;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.Y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
      out.Y(static_cast<Eigen::Index>(i)) = Y(rows[i]);
    }
    return out;
  }
};

}  // namespace groupbound
