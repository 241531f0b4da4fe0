#include "honest_ate/geometry.hpp"

#include <cmath>

#include "honest_ate/errors.hpp"

namespace honest_ate {

namespace {

double lp_accumulate(const Eigen::VectorXd& t, PNorm p) {
  switch (p) {
    case PNorm::one: return t.array().abs().sum();
    case PNorm::two: return t.norm();
    case PNorm::inf: return t.size() == 0 ? 0.0 : t.array().abs().maxCoeff();
  }
  return 0.0;
}

void check_dims(const Eigen::VectorXd& v, const NormSpec& norm) {
  if (norm.weight_matrix_half.rows() != norm.weight_matrix_half.cols()) {
    throw DimensionMismatchError("A^{1/2} must be square");
  }
  if (v.size() != norm.weight_matrix_half.cols()) {
    throw DimensionMismatchError("vector length does not match norm dimension");
  }
}

}  // namespace

double norm_eval(const Eigen::VectorXd& v, const NormSpec& norm) {
  check_dims(v, norm);
  return lp_accumulate(norm.weight_matrix_half * v, norm.exponent);
}

double monotone_deviation(const Eigen::VectorXd& v, const NormSpec& norm,
                          const std::vector<int>& monotone_indices) {
  check_dims(v, norm);
  if (monotone_indices.empty()) return norm_eval(v, norm);
  Eigen::VectorXd clipped = v;
  for (int k : monotone_indices) {
    if (k < 0 || k >= v.size()) {
      throw DimensionMismatchError("monotone index out of range");
    }
    clipped(k) = std::max(clipped(k), 0.0);
  }
  return lp_accumulate(norm.weight_matrix_half * clipped, norm.exponent);
}

DistanceMatrices cross_distances(const Sample& sample, const NormSpec& norm) {
  DistanceMatrices out;
  for (Eigen::Index i = 0; i < sample.n(); ++i) {
    (sample.treatments(i) == 1 ? out.treated_rows : out.control_rows).push_back(i);
  }
  const Eigen::Index n1 = static_cast<Eigen::Index>(out.treated_rows.size());
  const Eigen::Index n0 = static_cast<Eigen::Index>(out.control_rows.size());
  out.d0.resize(n1, n0);
  for (Eigen::Index i = 0; i < n1; ++i) {
    Eigen::VectorXd xi = sample.covariates.row(out.treated_rows[i]);
    for (Eigen::Index j = 0; j < n0; ++j) {
      Eigen::VectorXd diff = xi - sample.covariates.row(out.control_rows[j]).transpose();
      out.d0(i, j) = norm_eval(diff, norm);
    }
  }
  out.d1 = out.d0;
  return out;
}

Eigen::MatrixXd pairwise_distances(const Sample& sample, const NormSpec& norm) {
  const Eigen::Index n = sample.n();
  Eigen::MatrixXd d(n, n);
  d.setZero();
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = u + 1; v < n; ++v) {
      Eigen::VectorXd diff = sample.covariates.row(u) - sample.covariates.row(v);
      d(u, v) = d(v, u) = norm_eval(diff, norm);
    }
  }
  return d;
}

Eigen::MatrixXd pairwise_monotone_deviations(const Sample& sample,
                                             const NormSpec& norm,
                                             const std::vector<int>& monotone_indices) {
  const Eigen::Index n = sample.n();
  Eigen::MatrixXd d(n, n);
  d.setZero();
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = 0; v < n; ++v) {
      if (u == v) continue;
      Eigen::VectorXd diff = sample.covariates.row(u) - sample.covariates.row(v);
      d(u, v) = monotone_deviation(diff, norm, monotone_indices);
    }
  }
  return d;
}

}  // namespace honest_ate
