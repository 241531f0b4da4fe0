#ifndef HONEST_ATE_ESTIMATOR_HPP
#define HONEST_ATE_ESTIMATOR_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "honest_ate/solution_path.hpp"

namespace honest_ate {

/// A linear-in-outcomes estimator together with its design-only properties.
/// maxbias and sd are filled in where the producing operation defines them;
/// the estimate requires outcomes.
struct LinearEstimate {
  Eigen::VectorXd weights;  // length n, sample order
  std::optional<double> estimate;
  std::optional<double> maxbias;  // worst-case bias over the Lipschitz class
  std::optional<double> sd;       // under the working variance specification
  std::optional<double> delta;
  std::string provenance;
};

enum class CiKind { two_sided_flci, one_sided_lower, one_sided_upper };

struct HonestCI {
  CiKind kind = CiKind::two_sided_flci;
  double center_or_bound = 0.0;
  double half_length = 0.0;    // FLCI only
  double critical_value = 0.0;
  double se_used = 0.0;
  double alpha = 0.05;
  double beta = 0.8;

  double lower() const;
  double upper() const;
};

enum class Criterion { rmse, flci, oci };

/// Scalar queries along the path at a given mu, in C-scale.
struct PathPoint {
  double mu = 0.0;
  double delta = 0.0;
  double omega = 0.0;     // modulus value
  double sd = 0.0;        // equals omega'(delta)
  double maxbias = 0.0;   // (omega - delta * omega') / 2
};

PathPoint path_point(const SolutionPath& path, double mu, double C);

/// Inverse of the strictly increasing delta(mu) map (terminal segment
/// extends it to arbitrarily large delta).
double mu_for_delta(const SolutionPath& path, double delta, double C);

/// Optimal-estimator weights at mu, with worst-case bias and sd. Weights are
/// invariant to C; bias scales linearly in it.
LinearEstimate weights_at(const SolutionPath& path, double mu, double C,
                          const std::optional<Eigen::VectorXd>& outcomes = {});

/// The same weights recovered from the multiplier matrices instead of the
/// stationarity identity; used as an internal cross-check and for
/// match-count diagnostics.
LinearEstimate multiplier_weights_at(
    const SolutionPath& path, double mu, double C,
    const std::optional<Eigen::VectorXd>& outcomes = {});

/// Criterion value from (maxbias, sd):
///   rmse: sqrt(maxbias^2 + sd^2)
///   flci: 2 cv_alpha(maxbias/sd) sd
///   oci:  2 maxbias + sd (z_{1-alpha} + z_beta)
double criterion_value(double maxbias, double sd, Criterion which,
                       double alpha, double beta);

/// Criterion evaluated on the path at a given delta.
double criterion_at(const SolutionPath& path, double delta, Criterion which,
                    double C, double alpha, double beta);

struct TuneResult {
  double delta_star = 0.0;
  double mu_star = 0.0;
  LinearEstimate estimate;
};

/// Pick delta minimizing the criterion along the path. One-sided CIs use the
/// closed form delta = z_beta + z_{1-alpha}; the other criteria run a
/// per-segment golden-section search (ties resolve to the smallest mu).
TuneResult tune(const SolutionPath& path, Criterion which, double C,
                double alpha, double beta,
                const std::optional<Eigen::VectorXd>& outcomes = {});

/// Assemble a bias-aware confidence interval from an estimate and a
/// standard error.
HonestCI build_ci(const LinearEstimate& estimate, double se, double alpha,
                  CiKind kind, double beta = 0.8);

struct EfficiencyBounds {
  double oneside = 1.0;  // at delta = z_beta + z_{1-alpha}
  double flci = 1.0;     // shortest FLCI vs. confidence sets adapting to
                         // piecewise-constant functions
};

/// Sharp finite-sample efficiencies of the one-sided CI and the FLCI,
/// computed from the modulus along the path (truncated-normal expectation by
/// adaptive quadrature over [-8, z_{1-alpha}]).
EfficiencyBounds efficiency_bounds(const SolutionPath& path, double C,
                                   double alpha, double beta);

/// Weight-concentration diagnostic max_i k_i^2 / sum_j k_j^2.
double lindeberg_ratio(const Eigen::VectorXd& weights);

}  // namespace honest_ate

#endif  // HONEST_ATE_ESTIMATOR_HPP
