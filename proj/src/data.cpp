#include "honest_ate/data.hpp"

#include <cmath>

#include "honest_ate/errors.hpp"

namespace honest_ate {

NormSpec NormSpec::diagonal(const Eigen::VectorXd& diag, PNorm p) {
  NormSpec spec;
  spec.weight_matrix_half = diag.asDiagonal();
  spec.exponent = p;
  return spec;
}

NormSpec NormSpec::identity(Eigen::Index dim, PNorm p) {
  NormSpec spec;
  spec.weight_matrix_half = Eigen::MatrixXd::Identity(dim, dim);
  spec.exponent = p;
  return spec;
}

bool NormSpec::is_diagonal(double tol) const {
  const auto& a = weight_matrix_half;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (i != j && std::abs(a(i, j)) > tol) return false;
    }
  }
  return true;
}

bool TargetWeights::arm_level(const Sample& sample, double* w0, double* w1,
                              double tol) const {
  double v0 = -1.0, v1 = -1.0;
  bool seen0 = false, seen1 = false;
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    double wi = weights(i);
    if (sample.treatments(i) == 1) {
      if (!seen1) { v1 = wi; seen1 = true; }
      else if (std::abs(wi - v1) > tol) return false;
    } else {
      if (!seen0) { v0 = wi; seen0 = true; }
      else if (std::abs(wi - v0) > tol) return false;
    }
  }
  if (w0) *w0 = seen0 ? v0 : 0.0;
  if (w1) *w1 = seen1 ? v1 : 0.0;
  return true;
}

VarianceSpec VarianceSpec::homoskedastic(double s2) {
  VarianceSpec v;
  v.mode = VarianceMode::homoskedastic;
  v.sigma2 = s2;
  return v;
}

VarianceSpec VarianceSpec::per_arm(double s2_control, double s2_treated) {
  VarianceSpec v;
  v.mode = VarianceMode::per_arm;
  v.sigma2_0 = s2_control;
  v.sigma2_1 = s2_treated;
  return v;
}

VarianceSpec VarianceSpec::per_observation(const Eigen::VectorXd& s2) {
  VarianceSpec v;
  v.mode = VarianceMode::per_observation;
  v.sigma2_obs = s2;
  return v;
}

Eigen::VectorXd VarianceSpec::expand(const Sample& sample) const {
  const Eigen::Index n = sample.n();
  Eigen::VectorXd out(n);
  switch (mode) {
    case VarianceMode::homoskedastic:
      out.setConstant(sigma2);
      break;
    case VarianceMode::per_arm:
      for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = sample.treatments(i) == 1 ? sigma2_1 : sigma2_0;
      }
      break;
    case VarianceMode::per_observation:
      if (sigma2_obs.size() != n) {
        throw LengthMismatchError("variance vector length does not match n");
      }
      out = sigma2_obs;
      break;
  }
  return out;
}

bool VarianceSpec::arm_level(const Sample& sample, double* s2_control,
                             double* s2_treated, double tol) const {
  if (mode == VarianceMode::homoskedastic) {
    if (s2_control) *s2_control = sigma2;
    if (s2_treated) *s2_treated = sigma2;
    return true;
  }
  if (mode == VarianceMode::per_arm) {
    if (s2_control) *s2_control = sigma2_0;
    if (s2_treated) *s2_treated = sigma2_1;
    return true;
  }
  // Per-observation variances still qualify when constant within each arm.
  double v0 = -1.0, v1 = -1.0;
  bool seen0 = false, seen1 = false;
  if (sigma2_obs.size() != sample.n()) return false;
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    double s2 = sigma2_obs(i);
    if (sample.treatments(i) == 1) {
      if (!seen1) { v1 = s2; seen1 = true; }
      else if (std::abs(s2 - v1) > tol * (1.0 + std::abs(v1))) return false;
    } else {
      if (!seen0) { v0 = s2; seen0 = true; }
      else if (std::abs(s2 - v0) > tol * (1.0 + std::abs(v0))) return false;
    }
  }
  if (s2_control) *s2_control = v0;
  if (s2_treated) *s2_treated = v1;
  return true;
}

void VarianceSpec::validate(const Sample& sample) const {
  Eigen::VectorXd v = expand(sample);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0) || !std::isfinite(v(i))) {
      throw DataError("variances must be strictly positive and finite");
    }
  }
}

std::pair<Eigen::Index, Eigen::Index> validate_sample(const Sample& sample) {
  const Eigen::Index n = sample.n();
  if (n < 2) throw DataError("sample needs at least two units");
  if (sample.treatments.size() != n) {
    throw LengthMismatchError("treatments length does not match covariate rows");
  }
  Eigen::Index n1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    int d = sample.treatments(i);
    if (d != 0 && d != 1) {
      throw DataError("treatment indicators must be 0 or 1");
    }
    n1 += d;
  }
  const Eigen::Index n0 = n - n1;
  if (n0 == 0) throw EmptyArmError("no control units");
  if (n1 == 0) throw EmptyArmError("no treated units");
  if (!sample.covariates.allFinite()) {
    throw NonFiniteError("covariates contain NaN or infinity");
  }
  if (sample.outcomes) {
    if (sample.outcomes->size() != n) {
      throw LengthMismatchError("outcomes length does not match covariate rows");
    }
    if (!sample.outcomes->allFinite()) {
      throw NonFiniteError("outcomes contain NaN or infinity");
    }
  }
  return {n0, n1};
}

TargetWeights target_weights(TargetKind kind, const Sample& sample,
                             const Eigen::VectorXd* custom) {
  const Eigen::Index n = sample.n();
  TargetWeights tw;
  tw.kind = kind;
  switch (kind) {
    case TargetKind::cate:
      tw.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
      break;
    case TargetKind::catt: {
      const double n1 = static_cast<double>(sample.n_treated());
      tw.weights.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        tw.weights(i) = sample.treatments(i) == 1 ? 1.0 / n1 : 0.0;
      }
      break;
    }
    case TargetKind::custom: {
      if (custom == nullptr || custom->size() != n) {
        throw LengthMismatchError("custom target weights must have length n");
      }
      double total = custom->sum();
      if (std::abs(total - 1.0) > 1e-10) {
        throw WeightsSumNotOneError("custom target weights must sum to one");
      }
      if ((custom->array() < -1e-12).any()) {
        throw DataError("custom target weights must be nonnegative");
      }
      tw.weights = *custom;
      break;
    }
  }
  return tw;
}

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::cate: return "cate";
    case TargetKind::catt: return "catt";
    case TargetKind::custom: return "custom";
  }
  return "?";
}

std::string to_string(PNorm p) {
  switch (p) {
    case PNorm::one: return "1";
    case PNorm::two: return "2";
    case PNorm::inf: return "inf";
  }
  return "?";
}

}  // namespace honest_ate
