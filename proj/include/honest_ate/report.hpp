#ifndef HONEST_ATE_REPORT_HPP
#define HONEST_ATE_REPORT_HPP

#include <string>
#include <vector>

#include "honest_ate/serialize.hpp"
#include "honest_ate/variance.hpp"

namespace honest_ate {

/// Everything a CLI invocation needs; defaults mirror the main analysis
/// choices (CATT, p = 1, nearest-neighbor variance with J = 3, robust SE
/// feeding the critical value).
struct RunConfig {
  std::string csv_path;
  std::string outcome;
  std::string treatment;
  std::vector<std::string> covariates;

  std::vector<double> norm_diag;  // diagonal A^{1/2}; empty: identity
  std::string norm_file;          // full A^{1/2} matrix as headerless CSV
  PNorm p = PNorm::one;
  std::vector<double> c_grid = {1.0};
  std::vector<int> monotone_indices;  // 1-based user input

  TargetKind target = TargetKind::catt;
  double alpha = 0.05;
  double beta = 0.8;
  std::vector<Criterion> criteria = {Criterion::rmse, Criterion::flci,
                                     Criterion::oci};

  VarianceMethod var_method = VarianceMethod::nn;
  int nn_neighbors = 3;
  double nw_bandwidth = 1.0;
  VarianceMetric var_metric = VarianceMetric::analysis;
  SeChoice se_for_cv = SeChoice::robust;
  TiePolicy ties = TiePolicy::lowest_index;

  int m_fixed = 1;
  int m_min = 1;
  int m_max = 0;  // 0: use m_fixed

  std::string weights_file;  // audit input
  std::string format = "json";
  std::string cache_dir;
  bool from_cache = false;
};

json cmd_estimate(const RunConfig& config);
json cmd_sensitivity(const RunConfig& config);
json cmd_audit(const RunConfig& config);
json cmd_matching(const RunConfig& config);
json cmd_diagnostics(const RunConfig& config);
json cmd_path_dump(const RunConfig& config);

/// Human-readable rendering of a report produced by the commands above.
/// Numbers are the JSON values rounded half-even to the displayed digits.
std::string render_table(const json& report);

/// Round-half-even to the given number of decimal digits.
double round_half_even(double x, int digits);

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

}  // namespace honest_ate

#endif  // HONEST_ATE_REPORT_HPP
