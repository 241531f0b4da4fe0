#include "honest_ate/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "honest_ate/errors.hpp"

namespace honest_ate {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace and optional quotes
    std::size_t a = field.find_first_not_of(" \t\r");
    std::size_t b = field.find_last_not_of(" \t\r");
    field = a == std::string::npos ? "" : field.substr(a, b - a + 1);
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
      field = field.substr(1, field.size() - 2);
    }
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& s, std::size_t row, std::size_t col) {
  if (s.empty()) {
    throw DataError("empty field at row " + std::to_string(row) + ", column " +
                    std::to_string(col + 1));
  }
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end == s.c_str() || *end != '\0') {
    throw DataError("cannot parse '" + s + "' at row " + std::to_string(row) +
                    ", column " + std::to_string(col + 1));
  }
  return v;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return static_cast<int>(k);
  }
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + " is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
    line = line.substr(3);  // strip a UTF-8 BOM
  }
  CsvTable table;
  table.header = split_line(line);
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size()) {
      throw DataError(path + ": row " + std::to_string(lineno) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(table.header.size()));
    }
    std::vector<double> vals(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      vals[c] = parse_number(fields[c], lineno, c);
    }
    rows.push_back(std::move(vals));
  }
  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return table;
}

Sample sample_from_csv(const CsvTable& table, const std::string& outcome,
                       const std::string& treatment,
                       const std::vector<std::string>& covariates) {
  int d_col = table.column(treatment);
  if (d_col < 0) throw ConfigError("treatment column '" + treatment + "' not found");
  int y_col = -1;
  if (!outcome.empty()) {
    y_col = table.column(outcome);
    if (y_col < 0) throw ConfigError("outcome column '" + outcome + "' not found");
  }
  std::vector<int> x_cols;
  for (const std::string& name : covariates) {
    int c = table.column(name);
    if (c < 0) throw ConfigError("covariate column '" + name + "' not found");
    x_cols.push_back(c);
  }
  const Eigen::Index n = table.values.rows();
  Sample s;
  s.covariates.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  s.treatments.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    double d = table.values(r, d_col);
    if (d != 0.0 && d != 1.0) {
      throw DataError("treatment must be 0 or 1 at data row " +
                      std::to_string(r + 2));
    }
    s.treatments(r) = static_cast<int>(d);
    for (std::size_t k = 0; k < x_cols.size(); ++k) {
      s.covariates(r, static_cast<Eigen::Index>(k)) = table.values(r, x_cols[k]);
    }
  }
  if (y_col >= 0) s.outcomes = table.values.col(y_col);
  return s;
}

Eigen::VectorXd read_weights_csv(const std::string& path, Eigen::Index n) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<double> vals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split_line(line);
    if (fields.size() != 1) {
      throw DataError(path + ": expected one weight per row, got " +
                      std::to_string(fields.size()) + " fields at row " +
                      std::to_string(lineno));
    }
    if (lineno == 1) {
      // allow a header label
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str()) continue;
    }
    vals.push_back(parse_number(fields[0], lineno, 0));
  }
  if (static_cast<Eigen::Index>(vals.size()) != n) {
    throw LengthMismatchError("weights file has " + std::to_string(vals.size()) +
                              " rows, sample has " + std::to_string(n));
  }
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = vals[static_cast<std::size_t>(i)];
  return w;
}

}  // namespace honest_ate
