#include "honest_ate/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "honest_ate/csv.hpp"
#include "honest_ate/errors.hpp"
#include "honest_ate/stats.hpp"

namespace honest_ate {

namespace {

constexpr int kReportSchemaVersion = 1;

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

struct LoadedInputs {
  Sample sample;
  NormSpec norm;
  TargetWeights target;
  LipschitzSpec lipschitz_unit;  // C = 1, analysis norm, monotone set
};

NormSpec build_norm(const RunConfig& config, Eigen::Index dim) {
  NormSpec norm;
  if (!config.norm_file.empty()) {
    // headerless numeric matrix, one row per line
    std::ifstream in(config.norm_file);
    if (!in) throw DataError("cannot open " + config.norm_file);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r") continue;
      std::stringstream ss(line);
      std::string field;
      std::vector<double> row;
      while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
      rows.push_back(row);
    }
    if (rows.empty()) throw DataError(config.norm_file + " is empty");
    norm.weight_matrix_half.resize(static_cast<Eigen::Index>(rows.size()),
                                   static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size()) {
        throw DataError(config.norm_file + ": ragged matrix");
      }
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        norm.weight_matrix_half(static_cast<Eigen::Index>(r),
                                static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
  } else if (!config.norm_diag.empty()) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(config.norm_diag.size()));
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = config.norm_diag[k];
    norm.weight_matrix_half = d.asDiagonal();
  } else {
    norm.weight_matrix_half = Eigen::MatrixXd::Identity(dim, dim);
  }
  norm.exponent = config.p;
  if (norm.weight_matrix_half.rows() != dim) {
    throw ConfigError("norm dimension " +
                      std::to_string(norm.weight_matrix_half.rows()) +
                      " does not match the " + std::to_string(dim) +
                      " covariates");
  }
  if ((config.p == PNorm::one || config.p == PNorm::inf) &&
      !norm.is_diagonal(1e-14)) {
    throw ConfigError("p=1 and p=inf require a diagonal weight matrix");
  }
  return norm;
}

LoadedInputs load_inputs(const RunConfig& config, bool need_outcomes) {
  if (config.csv_path.empty()) throw ConfigError("--csv is required");
  if (config.treatment.empty()) throw ConfigError("--treatment is required");
  if (config.covariates.empty()) throw ConfigError("--covariates is required");
  if (need_outcomes && config.outcome.empty()) {
    throw ConfigError("--outcome is required for this command");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0,1)");
  }
  if (!(config.beta > 0.0 && config.beta < 1.0)) {
    throw ConfigError("beta must lie in (0,1)");
  }
  for (std::size_t k = 0; k + 1 < config.c_grid.size(); ++k) {
    if (!(config.c_grid[k] < config.c_grid[k + 1])) {
      throw ConfigError("the C grid must be strictly ascending");
    }
  }
  for (double c : config.c_grid) {
    if (!(c > 0.0)) throw ConfigError("Lipschitz constants must be positive");
  }

  LoadedInputs in;
  CsvTable table = read_csv(config.csv_path);
  in.sample = sample_from_csv(table, config.outcome, config.treatment,
                              config.covariates);
  validate_sample(in.sample);
  in.norm = build_norm(config, in.sample.dim());
  in.target = target_weights(config.target, in.sample);
  in.lipschitz_unit.constant = 1.0;
  in.lipschitz_unit.norm = in.norm;
  for (int ix : config.monotone_indices) {
    if (ix < 1 || ix > in.sample.dim()) {
      throw ConfigError("monotone index out of range: " + std::to_string(ix));
    }
    in.lipschitz_unit.monotone_indices.push_back(ix - 1);
  }
  return in;
}

PipelineOptions pipeline_options(const RunConfig& config) {
  PipelineOptions opt;
  opt.criteria = config.criteria;
  opt.method = config.var_method;
  opt.metric = config.var_metric;
  opt.nn_neighbors = config.nn_neighbors;
  opt.nw_bandwidth = config.nw_bandwidth;
  opt.se_for_cv = config.se_for_cv;
  return opt;
}

json config_echo(const RunConfig& config) {
  json j;
  j["csv"] = config.csv_path;
  j["outcome"] = config.outcome;
  j["treatment"] = config.treatment;
  j["covariates"] = config.covariates;
  j["p"] = to_string(config.p);
  j["target"] = to_string(config.target);
  j["alpha"] = config.alpha;
  j["beta"] = config.beta;
  j["C_grid"] = config.c_grid;
  json crits = json::array();
  for (Criterion c : config.criteria) crits.push_back(to_string(c));
  j["criteria"] = crits;
  j["variance"] = config.var_method == VarianceMethod::nn
                      ? "nn:" + std::to_string(config.nn_neighbors)
                      : "nw:" + std::to_string(config.nw_bandwidth);
  j["variance_metric"] =
      config.var_metric == VarianceMetric::analysis ? "analysis" : "mahalanobis";
  j["se_for_cv"] =
      config.se_for_cv == SeChoice::robust ? "robust" : "homoskedastic";
  j["ties"] =
      config.ties == TiePolicy::lowest_index ? "lowest" : "average";
  return j;
}

json ci_to_json(const HonestCI& ci) {
  json j;
  j["critical_value"] = ci.critical_value;
  j["se_used"] = ci.se_used;
  switch (ci.kind) {
    case CiKind::two_sided_flci:
      j["kind"] = "two_sided_flci";
      j["center"] = ci.center_or_bound;
      j["half_length"] = ci.half_length;
      j["lower"] = ci.lower();
      j["upper"] = ci.upper();
      break;
    case CiKind::one_sided_lower:
      j["kind"] = "one_sided_lower";
      j["bound"] = ci.center_or_bound;
      break;
    case CiKind::one_sided_upper:
      j["kind"] = "one_sided_upper";
      j["bound"] = ci.center_or_bound;
      break;
  }
  return j;
}

// Load a cached path if present, otherwise trace and (optionally) store it.
std::shared_ptr<const SolutionPath> obtain_path(const RunConfig& config,
                                                const LoadedInputs& in,
                                                double sigma2_hat,
                                                std::string* key_out) {
  std::string key = path_cache_key(in.sample, in.norm, in.target, sigma2_hat,
                                   sigma2_hat);
  if (key_out) *key_out = key;
  std::filesystem::path file;
  if (!config.cache_dir.empty()) {
    file = std::filesystem::path(config.cache_dir) / ("path-" + key + ".json");
    if (std::filesystem::exists(file)) {
      std::ifstream is(file);
      json j = json::parse(is);
      return std::make_shared<SolutionPath>(path_from_json(j));
    }
    if (config.from_cache) {
      throw ConfigError("--from-cache set but no cached path for key " + key);
    }
  } else if (config.from_cache) {
    throw ConfigError("--from-cache requires --cache-dir");
  }
  LipschitzSpec unit{1.0, in.norm, {}};
  auto path = std::make_shared<SolutionPath>(
      trace_path(in.sample, unit, in.target,
                 VarianceSpec::homoskedastic(sigma2_hat), {}));
  if (!config.cache_dir.empty()) {
    std::filesystem::create_directories(config.cache_dir);
    std::ofstream os(file);
    os << canonical_dump(path_to_json(*path));
  }
  return path;
}

double compute_sigma2_hat(const RunConfig& config, const LoadedInputs& in) {
  NormSpec var_norm = config.var_metric == VarianceMetric::analysis
                          ? in.norm
                          : mahalanobis_norm(in.sample);
  VarianceEstimate var = config.var_method == VarianceMethod::nn
                             ? nn_variance(in.sample, config.nn_neighbors, var_norm)
                             : nw_variance(in.sample, config.nw_bandwidth, var_norm);
  return var.sigma2_hom;
}

json pipeline_to_json(const RunConfig& config, const LoadedInputs& in,
                      const PipelineReport& report, const std::string& command,
                      const std::string& cache_key) {
  json out;
  out["schema_version"] = kReportSchemaVersion;
  out["command"] = command;
  out["config"] = config_echo(config);
  out["n"] = in.sample.n();
  out["n_treated"] = in.sample.n_treated();
  out["n_control"] = in.sample.n_control();
  out["sigma2_hat"] = report.sigma2_hat;
  out["variance_method"] = report.variance_method;
  out["path_knots"] = report.path->knots().size();
  out["cache_key"] = cache_key;
  json rows = json::array();
  for (const PipelineRow& row : report.rows) {
    json r;
    r["C"] = row.lipschitz_constant;
    r["criterion"] = to_string(row.criterion);
    r["delta"] = row.delta;
    r["estimate"] = row.estimate;
    r["maxbias"] = row.maxbias;
    r["se_homoskedastic"] = row.se_homoskedastic;
    r["se_robust"] = row.se_robust;
    r["critical_value"] = row.critical_value;
    r["flci"] = ci_to_json(row.flci);
    r["one_sided_lower"] = ci_to_json(row.lower_ci);
    r["one_sided_upper"] = ci_to_json(row.upper_ci);
    r["lindeberg"] = row.lindeberg;
    r["lindeberg_warning"] = row.lindeberg_warning;
    rows.push_back(std::move(r));
  }
  out["results"] = std::move(rows);
  return out;
}

json run_pipeline_command(const RunConfig& config, const std::string& command) {
  LoadedInputs in = load_inputs(config, /*need_outcomes=*/true);
  if (!in.lipschitz_unit.monotone_indices.empty()) {
    throw ConfigError("monotone constraints apply to audits only");
  }
  double sigma2_hat = compute_sigma2_hat(config, in);
  std::string key;
  auto path = obtain_path(config, in, sigma2_hat, &key);
  PipelineReport report =
      feasible_pipeline(in.sample, config.c_grid, in.norm, in.target,
                        config.alpha, config.beta, pipeline_options(config),
                        path);
  return pipeline_to_json(config, in, report, command, key);
}

}  // namespace

json cmd_estimate(const RunConfig& config) {
  if (config.c_grid.size() != 1) {
    throw ConfigError("estimate expects a single --C; use sensitivity for grids");
  }
  return run_pipeline_command(config, "estimate");
}

json cmd_sensitivity(const RunConfig& config) {
  if (config.c_grid.empty()) throw ConfigError("--C-grid is required");
  return run_pipeline_command(config, "sensitivity");
}

json cmd_audit(const RunConfig& config) {
  LoadedInputs in = load_inputs(config, /*need_outcomes=*/true);
  if (config.weights_file.empty()) throw ConfigError("--weights is required");
  Eigen::VectorXd k = read_weights_csv(config.weights_file, in.sample.n());

  json out;
  out["schema_version"] = kReportSchemaVersion;
  out["command"] = "audit";
  out["config"] = config_echo(config);
  out["n"] = in.sample.n();

  NormSpec var_norm = config.var_metric == VarianceMetric::analysis
                          ? in.norm
                          : mahalanobis_norm(in.sample);
  VarianceEstimate var =
      config.var_method == VarianceMethod::nn
          ? nn_variance(in.sample, config.nn_neighbors, var_norm)
          : nw_variance(in.sample, config.nw_bandwidth, var_norm);

  json rows = json::array();
  for (double c : config.c_grid) {
    LipschitzSpec lip = in.lipschitz_unit;
    lip.constant = c;
    double bias = worst_case_bias_lp(k, in.sample, lip, in.target);
    double se = robust_se(k, var.u2_hat);
    double se_hom = std::sqrt(k.squaredNorm() * var.sigma2_hom);
    LinearEstimate est;
    est.weights = k;
    est.maxbias = bias;
    est.estimate = k.dot(*in.sample.outcomes);
    double se_cv =
        config.se_for_cv == SeChoice::robust ? se : se_hom;
    json r;
    r["C"] = c;
    r["estimate"] = *est.estimate;
    r["maxbias"] = bias;
    r["se_robust"] = se;
    r["se_homoskedastic"] = se_hom;
    HonestCI flci = build_ci(est, se_cv, config.alpha, CiKind::two_sided_flci,
                             config.beta);
    r["critical_value"] = flci.critical_value;
    r["flci"] = ci_to_json(flci);
    r["one_sided_lower"] = ci_to_json(
        build_ci(est, se_cv, config.alpha, CiKind::one_sided_lower, config.beta));
    r["one_sided_upper"] = ci_to_json(
        build_ci(est, se_cv, config.alpha, CiKind::one_sided_upper, config.beta));
    double z = normal_quantile(1.0 - config.alpha / 2.0);
    r["conventional_cv"] = z;
    // A visibly inflated critical value signals non-negligible potential bias.
    r["bias_dominates"] = flci.critical_value > 1.1 * z;
    r["lindeberg"] = lindeberg_ratio(k);
    rows.push_back(std::move(r));
  }
  out["results"] = std::move(rows);
  return out;
}

json cmd_matching(const RunConfig& config) {
  LoadedInputs in = load_inputs(config, /*need_outcomes=*/true);
  DistanceMatrices dist = cross_distances(in.sample, in.norm);

  NormSpec var_norm = config.var_metric == VarianceMetric::analysis
                          ? in.norm
                          : mahalanobis_norm(in.sample);
  VarianceEstimate var =
      config.var_method == VarianceMethod::nn
          ? nn_variance(in.sample, config.nn_neighbors, var_norm)
          : nw_variance(in.sample, config.nw_bandwidth, var_norm);
  VarianceSpec working = VarianceSpec::homoskedastic(var.sigma2_hom);

  json out;
  out["schema_version"] = kReportSchemaVersion;
  out["command"] = "matching";
  out["config"] = config_echo(config);
  out["n"] = in.sample.n();
  out["sigma2_hat"] = var.sigma2_hom;

  json rows = json::array();
  for (double c : config.c_grid) {
    LipschitzSpec lip = in.lipschitz_unit;
    lip.constant = c;
    auto emit_row = [&](int m_used, Criterion crit, LinearEstimate est,
                        bool tuned) {
      double bias = est.maxbias ? *est.maxbias
                                : worst_case_bias_lp(est.weights, in.sample,
                                                     lip, in.target);
      double sd =
          std::sqrt(est.weights.squaredNorm() * var.sigma2_hom);
      double se_rob = robust_se(est.weights, var.u2_hat);
      est.maxbias = bias;
      double se_cv = config.se_for_cv == SeChoice::robust ? se_rob : sd;
      json r;
      r["C"] = c;
      r["criterion"] = to_string(crit);
      r["tuned"] = tuned;
      r["M"] = m_used;
      r["estimate"] = *est.estimate;
      r["maxbias"] = bias;
      r["se_homoskedastic"] = sd;
      r["se_robust"] = se_rob;
      HonestCI flci = build_ci(est, se_cv, config.alpha,
                               CiKind::two_sided_flci, config.beta);
      r["critical_value"] = flci.critical_value;
      r["flci"] = ci_to_json(flci);
      r["one_sided_lower"] = ci_to_json(build_ci(
          est, se_cv, config.alpha, CiKind::one_sided_lower, config.beta));
      r["one_sided_upper"] = ci_to_json(build_ci(
          est, se_cv, config.alpha, CiKind::one_sided_upper, config.beta));
      r["lindeberg"] = lindeberg_ratio(est.weights);
      rows.push_back(std::move(r));
    };
    if (config.m_max > 0) {
      std::vector<MatchingProfileRow> profile =
          matching_profile(in.sample, dist, config.m_min, config.m_max,
                           working, lip, in.target, config.ties);
      for (Criterion crit : config.criteria) {
        MatchingTuneResult t =
            tune_matching(profile, crit, config.alpha, config.beta);
        emit_row(t.m_star, crit, t.estimate, true);
      }
    } else {
      for (Criterion crit : config.criteria) {
        LinearEstimate est = matching_weights(in.sample, dist, config.m_fixed,
                                              in.target, config.ties);
        emit_row(config.m_fixed, crit, est, false);
      }
    }
  }
  out["results"] = std::move(rows);
  return out;
}

json cmd_diagnostics(const RunConfig& config) {
  LoadedInputs in = load_inputs(config, /*need_outcomes=*/true);
  if (!in.lipschitz_unit.monotone_indices.empty()) {
    throw ConfigError("monotone constraints apply to audits only");
  }
  double sigma2_hat = compute_sigma2_hat(config, in);
  std::string key;
  auto path = obtain_path(config, in, sigma2_hat, &key);

  json out;
  out["schema_version"] = kReportSchemaVersion;
  out["command"] = "diagnostics";
  out["config"] = config_echo(config);
  out["n"] = in.sample.n();
  out["sigma2_hat"] = sigma2_hat;
  out["cache_key"] = key;
  out["path_knots"] = path->knots().size();
  out["path_terminal"] = path->reached_terminal();

  json rows = json::array();
  for (double c : config.c_grid) {
    json r;
    r["C"] = c;
    EfficiencyBounds eff =
        efficiency_bounds(*path, c, config.alpha, config.beta);
    r["oneside_efficiency"] = eff.oneside;
    r["flci_efficiency"] = eff.flci;
    {
      // cost of reusing the RMSE-optimal delta for the FLCI
      TuneResult rmse = tune(*path, Criterion::rmse, c, config.alpha, config.beta);
      double at_rmse = criterion_at(*path, rmse.delta_star, Criterion::flci, c,
                                    config.alpha, config.beta);
      TuneResult flci = tune(*path, Criterion::flci, c, config.alpha, config.beta);
      double at_flci = criterion_at(*path, flci.delta_star, Criterion::flci, c,
                                    config.alpha, config.beta);
      r["flci_length_inflation_at_delta_rmse"] =
          at_flci > 0.0 ? at_rmse / at_flci : 1.0;
    }
    json per_crit = json::array();
    for (Criterion crit : config.criteria) {
      TuneResult t = tune(*path, crit, c, config.alpha, config.beta,
                          in.sample.outcomes);
      json cj;
      cj["criterion"] = to_string(crit);
      cj["delta"] = t.delta_star;
      cj["lindeberg"] = lindeberg_ratio(t.estimate.weights);
      // Active multipliers at the tuned point: how many opposite-arm units
      // each unit effectively borrows from.
      PathState st = path->state_at(t.mu_star);
      Eigen::VectorXd matches = Eigen::VectorXd::Zero(in.sample.n());
      for (const MultiplierEntry& e : st.lam0) {
        if (e.value > 1e-12) {
          matches(path->distances().treated_rows[e.i]) += 1.0;
        }
      }
      for (const MultiplierEntry& e : st.lam1) {
        if (e.value > 1e-12) {
          matches(path->distances().control_rows[e.j]) += 1.0;
        }
      }
      cj["effective_matches_mean"] = matches.mean();
      cj["effective_matches_max"] = matches.maxCoeff();
      per_crit.push_back(std::move(cj));
    }
    r["criteria"] = std::move(per_crit);
    rows.push_back(std::move(r));
  }
  out["results"] = std::move(rows);
  return out;
}

json cmd_path_dump(const RunConfig& config) {
  LoadedInputs in = load_inputs(config, /*need_outcomes=*/false);
  if (!in.lipschitz_unit.monotone_indices.empty()) {
    throw ConfigError("monotone constraints apply to audits only");
  }
  double sigma2_hat = 1.0;
  if (in.sample.outcomes) sigma2_hat = compute_sigma2_hat(config, in);
  std::string key;
  auto path = obtain_path(config, in, sigma2_hat, &key);
  json out = path_to_json(*path);
  out["cache_key"] = key;
  return out;
}

double round_half_even(double x, int digits) {
  double scale = std::pow(10.0, digits);
  double y = x * scale;
  double f = std::floor(y);
  double frac = y - f;
  double r;
  if (frac > 0.5) {
    r = f + 1.0;
  } else if (frac < 0.5) {
    r = f;
  } else {
    r = (std::fmod(f, 2.0) == 0.0) ? f : f + 1.0;
  }
  return r / scale;
}

namespace {

std::string fmt(double v, int digits = 2) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << round_half_even(v, digits);
  return os.str();
}

}  // namespace

std::string render_table(const json& report) {
  std::ostringstream os;
  std::string cmd = report.value("command", "");
  os << "command: " << cmd << "\n";
  if (report.contains("sigma2_hat")) {
    os << "sigma2_hat: " << fmt(report["sigma2_hat"].get<double>(), 4) << "\n";
  }
  if (!report.contains("results")) return os.str();
  os << std::left << std::setw(12) << "criterion" << std::right
     << std::setw(8) << "C" << std::setw(9) << "delta" << std::setw(5) << "M"
     << std::setw(10) << "estimate" << std::setw(9) << "maxbias"
     << std::setw(10) << "se(hom)" << std::setw(10) << "se(rob)"
     << std::setw(7) << "cv" << "\n";
  auto cell = [](const json& r, const char* key, int digits = 2) {
    return r.contains(key) ? fmt(r[key].get<double>(), digits)
                           : std::string("-");
  };
  for (const auto& r : report["results"]) {
    os << std::left << std::setw(12)
       << (r.contains("criterion") ? r["criterion"].get<std::string>() : "-")
       << std::right << std::setw(8) << cell(r, "C")
       << std::setw(9) << cell(r, "delta")
       << std::setw(5) << (r.contains("M") ? std::to_string(r["M"].get<int>()) : "-")
       << std::setw(10) << cell(r, "estimate")
       << std::setw(9) << cell(r, "maxbias")
       << std::setw(10) << cell(r, "se_homoskedastic")
       << std::setw(10) << cell(r, "se_robust")
       << std::setw(7) << cell(r, "critical_value") << "\n";
  }
  return os.str();
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::rmse: return "rmse";
    case Criterion::flci: return "flci";
    case Criterion::oci: return "oci";
  }
  return "?";
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "rmse") return Criterion::rmse;
  if (s == "flci") return Criterion::flci;
  if (s == "oci") return Criterion::oci;
  throw ConfigError("unknown criterion: " + s);
}

}  // namespace honest_ate
