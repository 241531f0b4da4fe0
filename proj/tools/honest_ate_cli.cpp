// honest-ate: minimax-linear CATE/CATT estimation with bias-aware CIs.

#include <CLI11.hpp>
#include <iostream>
#include <sstream>
#include <string>

#include "honest_ate/errors.hpp"
#include "honest_ate/report.hpp"

namespace {

using honest_ate::RunConfig;

struct RawArgs {
  std::string p = "1";
  std::string target = "catt";
  std::string metric = "analysis";
  std::string se = "robust";
  std::string ties = "lowest";
  std::string c_list;
  std::string criteria_list;
  std::string variance;
  std::string m_range;
};

void add_common_options(CLI::App* app, RunConfig* config, RawArgs* raw) {
  app->add_option("--csv", config->csv_path, "input CSV file (header row required)");
  app->add_option("--outcome", config->outcome, "outcome column name");
  app->add_option("--treatment", config->treatment, "treatment column name (0/1)");
  app->add_option("--covariates", config->covariates,
                  "covariate column names, in order")
      ->delimiter(',');
  app->add_option("--norm-diag", config->norm_diag, "diagonal entries of A^{1/2}")
      ->delimiter(',');
  app->add_option("--norm-file", config->norm_file,
                  "A^{1/2} as a headerless CSV matrix");
  app->add_option("--p", raw->p, "norm exponent: 1, 2 or inf")
      ->check(CLI::IsMember({"1", "2", "inf"}));
  app->add_option("--C", raw->c_list, "Lipschitz constant (or comma list)");
  app->add_option("--C-grid", raw->c_list, "ascending Lipschitz-constant grid");
  app->add_option("--target", raw->target, "estimand")
      ->check(CLI::IsMember({"cate", "catt"}));
  app->add_option("--alpha", config->alpha, "CI level is 1 - alpha");
  app->add_option("--beta", config->beta,
                  "excess-length quantile for one-sided CIs");
  app->add_option("--criterion", raw->criteria_list,
                  "comma list from rmse,flci,oci");
  app->add_option("--variance", raw->variance, "variance estimator: nn:J or nw:h");
  app->add_option("--variance-metric", raw->metric, "neighbor metric")
      ->check(CLI::IsMember({"analysis", "mahalanobis"}));
  app->add_option("--se-for-cv", raw->se,
                  "standard error feeding the critical value")
      ->check(CLI::IsMember({"robust", "homoskedastic"}));
  app->add_option("--ties", raw->ties, "matching tie policy")
      ->check(CLI::IsMember({"lowest", "average"}));
  app->add_option("--monotone", config->monotone_indices,
                  "1-based covariate indices with monotone effects "
                  "(bias audits only)")
      ->delimiter(',');
  app->add_option("--format", config->format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));
  app->add_option("--cache-dir", config->cache_dir, "path cache directory");
  app->add_flag("--from-cache", config->from_cache,
                "require the path to come from the cache");
}

void finish_config(RunConfig* config, const RawArgs& raw) {
  if (raw.p == "1") config->p = honest_ate::PNorm::one;
  else if (raw.p == "2") config->p = honest_ate::PNorm::two;
  else config->p = honest_ate::PNorm::inf;
  config->target = raw.target == "cate" ? honest_ate::TargetKind::cate
                                        : honest_ate::TargetKind::catt;
  config->var_metric = raw.metric == "analysis"
                           ? honest_ate::VarianceMetric::analysis
                           : honest_ate::VarianceMetric::mahalanobis;
  config->se_for_cv = raw.se == "robust" ? honest_ate::SeChoice::robust
                                         : honest_ate::SeChoice::homoskedastic;
  config->ties = raw.ties == "lowest" ? honest_ate::TiePolicy::lowest_index
                                      : honest_ate::TiePolicy::average;
  if (!raw.c_list.empty()) {
    config->c_grid.clear();
    std::stringstream ss(raw.c_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) config->c_grid.push_back(std::stod(tok));
    }
  }
  if (!raw.criteria_list.empty()) {
    config->criteria.clear();
    std::stringstream ss(raw.criteria_list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) {
        config->criteria.push_back(honest_ate::criterion_from_string(tok));
      }
    }
  }
  if (!raw.variance.empty()) {
    auto colon = raw.variance.find(':');
    std::string kind = raw.variance.substr(0, colon);
    std::string val =
        colon == std::string::npos ? "" : raw.variance.substr(colon + 1);
    if (kind == "nn") {
      config->var_method = honest_ate::VarianceMethod::nn;
      if (!val.empty()) config->nn_neighbors = std::stoi(val);
    } else if (kind == "nw") {
      config->var_method = honest_ate::VarianceMethod::nw;
      if (!val.empty()) config->nw_bandwidth = std::stod(val);
    } else {
      throw honest_ate::ConfigError("unknown variance estimator: " + kind);
    }
  }
  if (!raw.m_range.empty()) {
    auto colon = raw.m_range.find(':');
    if (colon == std::string::npos) {
      throw honest_ate::ConfigError("--M-range expects lo:hi");
    }
    config->m_min = std::stoi(raw.m_range.substr(0, colon));
    config->m_max = std::stoi(raw.m_range.substr(colon + 1));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-sample minimax estimators and honest CIs for "
               "treatment effects under Lipschitz smoothness"};
  app.require_subcommand(1);

  RunConfig config;
  RawArgs raw;

  CLI::App* est = app.add_subcommand("estimate", "tuned optimal estimator and CIs");
  CLI::App* sens = app.add_subcommand(
      "sensitivity", "estimates and CI bounds across a grid of Lipschitz constants");
  CLI::App* audit = app.add_subcommand(
      "audit", "worst-case bias and honest CI for supplied weights");
  CLI::App* match = app.add_subcommand(
      "matching", "matching estimator: fixed M or tuned over a range");
  CLI::App* diag = app.add_subcommand(
      "diagnostics", "weight concentration, path and efficiency diagnostics");
  CLI::App* dump = app.add_subcommand("path-dump", "emit the traced path archive");

  for (CLI::App* sub : {est, sens, audit, match, diag, dump}) {
    add_common_options(sub, &config, &raw);
  }
  audit->add_option("--weights", config.weights_file,
                    "CSV with one weight per sample row");
  match->add_option("--M", config.m_fixed, "number of matches");
  match->add_option("--M-range", raw.m_range, "lo:hi range to tune over");

  try {
    app.parse(argc, argv);
    finish_config(&config, raw);

    honest_ate::json report;
    if (est->parsed()) report = honest_ate::cmd_estimate(config);
    else if (sens->parsed()) report = honest_ate::cmd_sensitivity(config);
    else if (audit->parsed()) report = honest_ate::cmd_audit(config);
    else if (match->parsed()) report = honest_ate::cmd_matching(config);
    else if (diag->parsed()) report = honest_ate::cmd_diagnostics(config);
    else if (dump->parsed()) report = honest_ate::cmd_path_dump(config);

    if (config.format == "table") {
      std::cout << honest_ate::render_table(report);
    } else {
      std::cout << report.dump(2) << "\n";
    }
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const honest_ate::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case honest_ate::ErrorKind::config: return 2;
      case honest_ate::ErrorKind::data: return 3;
      case honest_ate::ErrorKind::numerical: return 4;
    }
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
