// Shared builders for small designs used across the test suites.
#ifndef HONEST_ATE_TESTS_HELPERS_HPP
#define HONEST_ATE_TESTS_HELPERS_HPP

#include <Eigen/Dense>
#include <random>

#include "honest_ate/data.hpp"

namespace test_helpers {

using honest_ate::PNorm;
using honest_ate::Sample;

inline Sample line_sample(std::initializer_list<double> xs,
                          std::initializer_list<int> ds) {
  Sample s;
  s.covariates.resize(static_cast<Eigen::Index>(xs.size()), 1);
  s.treatments.resize(static_cast<Eigen::Index>(ds.size()));
  Eigen::Index k = 0;
  for (double x : xs) s.covariates(k++, 0) = x;
  k = 0;
  for (int d : ds) s.treatments(k++) = d;
  return s;
}

// x = 0 control, x = 1 treated; the hand-solved reference instance.
inline Sample two_point() { return line_sample({0.0, 1.0}, {0, 1}); }

// Balanced random design on [0,1]^2.
inline Sample random_design(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Sample s;
  s.covariates.resize(n, 2);
  s.treatments.resize(n);
  for (int i = 0; i < n; ++i) {
    s.covariates(i, 0) = unif(rng);
    s.covariates(i, 1) = unif(rng);
    s.treatments(i) = i < n / 2 ? 0 : 1;
  }
  // shuffle the arm labels so ordering is not special
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    int j = pick(rng);
    std::swap(s.treatments(i), s.treatments(j));
  }
  if (s.n_treated() == 0) s.treatments(0) = 1;
  if (s.n_control() == 0) s.treatments(0) = 0;
  return s;
}

inline double random_arm_sigma2(std::mt19937& rng) {
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  return unif(rng);
}

}  // namespace test_helpers

#endif  // HONEST_ATE_TESTS_HELPERS_HPP
