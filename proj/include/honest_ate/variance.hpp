#ifndef HONEST_ATE_VARIANCE_HPP
#define HONEST_ATE_VARIANCE_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "honest_ate/alt_estimators.hpp"
#include "honest_ate/estimator.hpp"

namespace honest_ate {

struct VarianceEstimate {
  Eigen::VectorXd u2_hat;   // per-observation squared residual estimates
  double sigma2_hom = 0.0;  // pooled mean of u2_hat
  std::string method;
  NormSpec norm_used;
  bool degenerate = false;  // e.g. every window collapsed to the unit itself
};

/// Nearest-neighbor variance estimator: u_i^2 = J/(J+1) (y_i - mean of the J
/// nearest same-arm outcomes)^2, neighbors by the given norm with
/// lowest-index tie break.
VarianceEstimate nn_variance(const Sample& sample, int J, const NormSpec& norm);

/// Uniform-kernel Nadaraya-Watson residuals: the same-arm window of radius
/// `bandwidth` around x_i (excluding i itself whenever the window holds at
/// least one other unit).
VarianceEstimate nw_variance(const Sample& sample, double bandwidth,
                             const NormSpec& norm);

/// sqrt(sum_i k_i^2 u_i^2).
double robust_se(const Eigen::VectorXd& weights, const Eigen::VectorXd& u2_hat);

/// Inverse-covariance (Mahalanobis) norm built from the sample covariates.
NormSpec mahalanobis_norm(const Sample& sample);

enum class VarianceMethod { nn, nw };
enum class VarianceMetric { analysis, mahalanobis };
enum class SeChoice { robust, homoskedastic };

struct PipelineOptions {
  std::vector<Criterion> criteria = {Criterion::rmse, Criterion::flci,
                                     Criterion::oci};
  VarianceMethod method = VarianceMethod::nn;
  VarianceMetric metric = VarianceMetric::analysis;
  int nn_neighbors = 3;
  double nw_bandwidth = 1.0;
  SeChoice se_for_cv = SeChoice::robust;
  double lindeberg_warn = 0.1;
};

struct PipelineRow {
  double lipschitz_constant = 1.0;
  Criterion criterion = Criterion::rmse;
  double delta = 0.0;
  double estimate = 0.0;
  double maxbias = 0.0;
  double se_homoskedastic = 0.0;
  double se_robust = 0.0;
  double critical_value = 0.0;
  HonestCI flci;
  HonestCI lower_ci;
  HonestCI upper_ci;
  double lindeberg = 0.0;
  bool lindeberg_warning = false;
  Eigen::VectorXd weights;
};

struct PipelineReport {
  double sigma2_hat = 0.0;    // homoskedastic working guess
  std::string variance_method;
  std::vector<PipelineRow> rows;
  double alpha = 0.05;
  double beta = 0.8;
  std::shared_ptr<const SolutionPath> path;  // traced (or reused) path
};

/// Three-step feasible pipeline: estimate a homoskedastic working variance,
/// trace one path in unit Lipschitz scale, then tune and report per (C,
/// criterion) with robust standard errors. The path is shared across the
/// whole C grid; pass a previously traced path to skip the homotopy.
PipelineReport feasible_pipeline(
    const Sample& sample, const std::vector<double>& c_grid,
    const NormSpec& norm, const TargetWeights& target, double alpha,
    double beta, const PipelineOptions& options,
    std::shared_ptr<const SolutionPath> cached_path = nullptr);

}  // namespace honest_ate

#endif  // HONEST_ATE_VARIANCE_HPP
