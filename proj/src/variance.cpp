#include "honest_ate/variance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "honest_ate/errors.hpp"
#include "honest_ate/stats.hpp"

namespace honest_ate {

namespace {

// Same-arm neighbor distances for one unit (excluding the unit itself),
// sorted by (distance, index).
std::vector<std::pair<double, Eigen::Index>> same_arm_neighbors(
    const Sample& sample, const NormSpec& norm, Eigen::Index u) {
  std::vector<std::pair<double, Eigen::Index>> out;
  for (Eigen::Index v = 0; v < sample.n(); ++v) {
    if (v == u || sample.treatments(v) != sample.treatments(u)) continue;
    Eigen::VectorXd diff = sample.covariates.row(u) - sample.covariates.row(v);
    out.emplace_back(norm_eval(diff, norm), v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

VarianceEstimate nn_variance(const Sample& sample, int J, const NormSpec& norm) {
  validate_sample(sample);
  if (!sample.outcomes) throw DataError("variance estimation needs outcomes");
  if (J < 1) throw ConfigError("J must be at least one");
  if (sample.n_treated() <= J || sample.n_control() <= J) {
    throw ArmTooSmallError("each arm needs more than J units");
  }
  const Eigen::VectorXd& y = *sample.outcomes;
  VarianceEstimate est;
  est.u2_hat.resize(sample.n());
  est.method = "nn:" + std::to_string(J);
  est.norm_used = norm;
  const double shrink = static_cast<double>(J) / (J + 1);
  for (Eigen::Index u = 0; u < sample.n(); ++u) {
    auto nb = same_arm_neighbors(sample, norm, u);
    double mean = 0.0;
    for (int k = 0; k < J; ++k) mean += y(nb[k].second);
    mean /= J;
    double resid = y(u) - mean;
    est.u2_hat(u) = shrink * resid * resid;
  }
  est.sigma2_hom = est.u2_hat.mean();
  return est;
}

VarianceEstimate nw_variance(const Sample& sample, double bandwidth,
                             const NormSpec& norm) {
  validate_sample(sample);
  if (!sample.outcomes) throw DataError("variance estimation needs outcomes");
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  const Eigen::VectorXd& y = *sample.outcomes;
  VarianceEstimate est;
  est.u2_hat.resize(sample.n());
  est.method = "nw:" + std::to_string(bandwidth);
  est.norm_used = norm;
  int lonely = 0;
  for (Eigen::Index u = 0; u < sample.n(); ++u) {
    auto nb = same_arm_neighbors(sample, norm, u);
    double sum = 0.0;
    int count = 0;
    for (const auto& [d, v] : nb) {
      if (d > bandwidth) break;
      sum += y(v);
      ++count;
    }
    if (count == 0) {
      // Window holds only the unit itself; its residual degenerates to zero.
      est.u2_hat(u) = 0.0;
      ++lonely;
      continue;
    }
    double resid = y(u) - sum / count;
    est.u2_hat(u) = resid * resid;
  }
  if (lonely == sample.n()) est.degenerate = true;
  est.sigma2_hom = est.u2_hat.mean();
  return est;
}

double robust_se(const Eigen::VectorXd& weights, const Eigen::VectorXd& u2_hat) {
  if (weights.size() != u2_hat.size()) {
    throw LengthMismatchError("weights and residual vector lengths differ");
  }
  return std::sqrt(weights.array().square().matrix().dot(u2_hat));
}

NormSpec mahalanobis_norm(const Sample& sample) {
  const Eigen::Index p = sample.dim();
  Eigen::MatrixXd centered =
      sample.covariates.rowwise() - sample.covariates.colwise().mean();
  Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(sample.n() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::VectorXd vals = eig.eigenvalues();
  for (Eigen::Index k = 0; k < p; ++k) {
    if (vals(k) < 1e-12) {
      throw DataError("covariate covariance is singular; Mahalanobis metric "
                      "is unavailable");
    }
  }
  NormSpec norm;
  norm.exponent = PNorm::two;
  norm.weight_matrix_half = eig.eigenvectors() *
                            vals.cwiseSqrt().cwiseInverse().asDiagonal() *
                            eig.eigenvectors().transpose();
  return norm;
}

PipelineReport feasible_pipeline(
    const Sample& sample, const std::vector<double>& c_grid,
    const NormSpec& norm, const TargetWeights& target, double alpha,
    double beta, const PipelineOptions& options,
    std::shared_ptr<const SolutionPath> cached_path) {
  validate_sample(sample);
  if (!sample.outcomes) throw DataError("the feasible pipeline needs outcomes");
  if (c_grid.empty()) throw ConfigError("empty Lipschitz-constant grid");
  for (double c : c_grid) {
    if (!(c > 0.0)) throw ConfigError("Lipschitz constants must be positive");
  }

  NormSpec var_norm = options.metric == VarianceMetric::analysis
                          ? norm
                          : mahalanobis_norm(sample);
  VarianceEstimate var =
      options.method == VarianceMethod::nn
          ? nn_variance(sample, options.nn_neighbors, var_norm)
          : nw_variance(sample, options.nw_bandwidth, var_norm);
  if (var.degenerate || !(var.sigma2_hom > 0.0)) {
    throw NumericalError("variance estimate degenerated to zero");
  }

  PipelineReport report;
  report.sigma2_hat = var.sigma2_hom;
  report.variance_method = var.method;
  report.alpha = alpha;
  report.beta = beta;

  if (cached_path) {
    report.path = std::move(cached_path);
  } else {
    LipschitzSpec unit{1.0, norm, {}};
    report.path = std::make_shared<SolutionPath>(
        trace_path(sample, unit, target,
                   VarianceSpec::homoskedastic(var.sigma2_hom), {}));
  }
  const SolutionPath& path = *report.path;

  for (double c : c_grid) {
    for (Criterion crit : options.criteria) {
      TuneResult tuned = tune(path, crit, c, alpha, beta, sample.outcomes);
      PipelineRow row;
      row.lipschitz_constant = c;
      row.criterion = crit;
      row.delta = tuned.delta_star;
      row.estimate = *tuned.estimate.estimate;
      row.maxbias = *tuned.estimate.maxbias;
      row.se_homoskedastic = *tuned.estimate.sd;
      row.se_robust = robust_se(tuned.estimate.weights, var.u2_hat);
      double se_cv = options.se_for_cv == SeChoice::robust
                         ? row.se_robust
                         : row.se_homoskedastic;
      row.critical_value = critical_value(row.maxbias / se_cv, alpha);
      row.flci = build_ci(tuned.estimate, se_cv, alpha,
                          CiKind::two_sided_flci, beta);
      row.lower_ci = build_ci(tuned.estimate, se_cv, alpha,
                              CiKind::one_sided_lower, beta);
      row.upper_ci = build_ci(tuned.estimate, se_cv, alpha,
                              CiKind::one_sided_upper, beta);
      row.lindeberg = lindeberg_ratio(tuned.estimate.weights);
      row.lindeberg_warning = row.lindeberg > options.lindeberg_warn;
      row.weights = tuned.estimate.weights;
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace honest_ate
