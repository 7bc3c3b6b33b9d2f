#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace groupbound::io {

/// CSV parse error carrying a 1-based location.
struct ParseError {
  std::string message;
  int row = 0;
  int column = 0;
};

/// Plain comma-separated numeric matrix, '.' decimal, optional header row.
/// Throws ParseError with the offending row/column.
Eigen::MatrixXd read_csv_matrix(const std::string& path, bool header);

/// Single numeric column.
Eigen::VectorXd read_csv_vector(const std::string& path, bool header);

struct GroupSpec {
  std::string name;
  std::vector<int> indices;  // 0-based after loading
};

/// JSON array of {"name": string, "indices": [1-based ints]}. Indices are
/// converted to 0-based here; range checking is the caller's job (it needs
/// p). Throws ParseError on malformed JSON.
std::vector<GroupSpec> read_groups_json(const std::string& path);

}  // namespace groupbound::io
