#ifndef HONEST_ATE_DATA_HPP
#define HONEST_ATE_DATA_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace honest_ate {

/// Fixed-design sample: covariates, binary treatments, optional outcomes.
/// Covariates are used as supplied; all scaling lives in the norm.
struct Sample {
  Eigen::MatrixXd covariates;            // n x p
  Eigen::VectorXi treatments;            // n, entries in {0,1}
  std::optional<Eigen::VectorXd> outcomes;  // n, if observed

  Eigen::Index n() const { return covariates.rows(); }
  Eigen::Index dim() const { return covariates.cols(); }
  Eigen::Index n_treated() const { return treatments.sum(); }
  Eigen::Index n_control() const { return n() - n_treated(); }
};

enum class PNorm { one, two, inf };

/// Weighted-Lp norm ||x||_{A,p} = (sum_k |(A^{1/2} x)_k|^p)^{1/p}.
struct NormSpec {
  Eigen::MatrixXd weight_matrix_half;  // p x p, symmetric PSD (A^{1/2})
  PNorm exponent = PNorm::two;

  static NormSpec diagonal(const Eigen::VectorXd& diag, PNorm p);
  static NormSpec identity(Eigen::Index dim, PNorm p);
  bool is_diagonal(double tol = 0.0) const;
};

/// Lipschitz function class: constant C, norm, and an optional set of
/// covariate indices (0-based) along which the regression functions are
/// nondecreasing. The monotone set is honored by the worst-case-bias LP only.
struct LipschitzSpec {
  double constant = 1.0;
  NormSpec norm;
  std::vector<int> monotone_indices;
};

enum class TargetKind { cate, catt, custom };

/// Weights w_i defining the estimand sum_i w_i (f(x_i,1) - f(x_i,0)).
struct TargetWeights {
  TargetKind kind = TargetKind::cate;
  Eigen::VectorXd weights;  // nonnegative, sums to one

  /// True when w_i depends on unit i only through its treatment arm.
  bool arm_level(const Sample& sample, double* w0 = nullptr,
                 double* w1 = nullptr, double tol = 1e-12) const;
};

enum class VarianceMode { homoskedastic, per_arm, per_observation };

/// Working specification of the error variance sigma^2(x_i, d_i).
struct VarianceSpec {
  VarianceMode mode = VarianceMode::homoskedastic;
  double sigma2 = 1.0;        // homoskedastic
  double sigma2_0 = 1.0;      // per_arm, control
  double sigma2_1 = 1.0;      // per_arm, treated
  Eigen::VectorXd sigma2_obs; // per_observation

  static VarianceSpec homoskedastic(double s2);
  static VarianceSpec per_arm(double s2_control, double s2_treated);
  static VarianceSpec per_observation(const Eigen::VectorXd& s2);

  /// Expand to a per-unit variance vector for the given sample.
  Eigen::VectorXd expand(const Sample& sample) const;
  /// Arm-level variances if representable; false for genuinely
  /// unit-specific variances.
  bool arm_level(const Sample& sample, double* s2_control, double* s2_treated,
                 double tol = 1e-12) const;
  void validate(const Sample& sample) const;
};

/// Check the Sample invariants and return the counts (n0, n1).
/// Throws EmptyArmError, NonFiniteError or LengthMismatchError.
std::pair<Eigen::Index, Eigen::Index> validate_sample(const Sample& sample);

/// Build target weights for the given estimand. Custom weights are checked
/// for normalization (tolerance 1e-10) and nonnegativity.
TargetWeights target_weights(TargetKind kind, const Sample& sample,
                             const Eigen::VectorXd* custom = nullptr);

std::string to_string(TargetKind kind);
std::string to_string(PNorm p);

}  // namespace honest_ate

#endif  // HONEST_ATE_DATA_HPP
