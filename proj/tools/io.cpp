#include "io.hpp"

#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace groupbound::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_field(const std::string& field, int row, int col) {
  std::size_t begin = field.find_first_not_of(" \t");
  if (begin == std::string::npos) {
    throw ParseError{"empty numeric field", row, col};
  }
  const std::size_t end = field.find_last_not_of(" \t") + 1;
  double value = 0.0;
  const char* first = field.data() + begin;
  const char* last = field.data() + end;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) {
    throw ParseError{"cannot parse '" + field + "' as a number", row, col};
  }
  return value;
}

std::vector<std::vector<double>> read_rows(const std::string& path,
                                           bool header) {
  std::ifstream in(path);
  if (!in) throw ParseError{"cannot open " + path, 0, 0};
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    const auto fields = split_fields(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      row.push_back(parse_field(fields[c], lineno, static_cast<int>(c) + 1));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError{"row has " + std::to_string(row.size()) +
                           " fields, expected " +
                           std::to_string(rows.front().size()),
                       lineno, 1};
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError{"no data rows in " + path, lineno, 1};
  return rows;
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const std::string& path, bool header) {
  const auto rows = read_rows(path, header);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return m;
}

Eigen::VectorXd read_csv_vector(const std::string& path, bool header) {
  const auto rows = read_rows(path, header);
  Eigen::VectorXd v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 1) {
      throw ParseError{"expected a single column", static_cast<int>(i) + 1,
                       2};
    }
    v(static_cast<Eigen::Index>(i)) = rows[i][0];
  }
  return v;
}

std::vector<GroupSpec> read_groups_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError{"cannot open " + path, 0, 0};
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError{std::string("invalid JSON: ") + e.what(), 0, 0};
  }
  if (!doc.is_array()) {
    throw ParseError{"groups file must be a JSON array", 0, 0};
  }
  std::vector<GroupSpec> out;
  for (const auto& item : doc) {
    GroupSpec g;
    try {
      g.name = item.at("name").get<std::string>();
      for (const auto& idx : item.at("indices")) {
        g.indices.push_back(idx.get<int>() - 1);  // 1-based on disk
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError{std::string("bad group entry: ") + e.what(), 0, 0};
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace groupbound::io
