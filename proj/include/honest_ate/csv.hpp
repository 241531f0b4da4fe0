#ifndef HONEST_ATE_CSV_HPP
#define HONEST_ATE_CSV_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "honest_ate/data.hpp"

namespace honest_ate {

/// Parsed CSV: header names plus a dense numeric matrix, one row per record.
/// Header row required, UTF-8, comma separated, decimal points only.
struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

/// Assemble a Sample from named columns. Treatment entries must be 0 or 1.
Sample sample_from_csv(const CsvTable& table, const std::string& outcome,
                       const std::string& treatment,
                       const std::vector<std::string>& covariates);

/// One weight per row; a single-column header is permitted and skipped.
Eigen::VectorXd read_weights_csv(const std::string& path, Eigen::Index n);

}  // namespace honest_ate

#endif  // HONEST_ATE_CSV_HPP
