#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "honest_ate/errors.hpp"
#include "honest_ate/stats.hpp"
#include "honest_ate/variance.hpp"
#include "test_helpers.hpp"

using namespace honest_ate;
using test_helpers::line_sample;

namespace {
NormSpec euclid(Eigen::Index dim) { return NormSpec::identity(dim, PNorm::two); }
}  // namespace

TEST_CASE("nearest-neighbor residuals with one neighbor") {
  Sample s = line_sample({0.0, 0.1, 5.0, 5.1}, {0, 0, 1, 1});
  s.outcomes = Eigen::VectorXd(4);
  *s.outcomes << 1.0, 0.0, 2.0, 2.0;
  VarianceEstimate v = nn_variance(s, 1, euclid(1));
  CHECK(v.u2_hat(0) == doctest::Approx(0.5));  // (1/2) * (1-0)^2
  CHECK(v.u2_hat(1) == doctest::Approx(0.5));
  CHECK(v.u2_hat(2) == doctest::Approx(0.0));
  CHECK(v.sigma2_hom == doctest::Approx(0.25));
}

TEST_CASE("constant outcomes give zero variance") {
  Sample s = line_sample({0.0, 1.0, 2.0, 3.0}, {0, 0, 1, 1});
  s.outcomes = Eigen::VectorXd::Constant(4, 3.0);
  VarianceEstimate v = nn_variance(s, 1, euclid(1));
  CHECK(v.u2_hat.isZero());
}

TEST_CASE("three equidistant neighbors recover the shrunk residual") {
  // unit at the center of three same-arm neighbors with mean ybar
  Sample s = line_sample({0.0, 1.0, -1.0, 2.0, 10.0, 11.0, 12.0, 13.0},
                         {0, 0, 0, 0, 1, 1, 1, 1});
  s.outcomes = Eigen::VectorXd(8);
  *s.outcomes << 4.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0;
  VarianceEstimate v = nn_variance(s, 3, euclid(1));
  double ybar = (1.0 + 2.0 + 3.0) / 3.0;
  CHECK(v.u2_hat(0) == doctest::Approx(0.75 * (4.0 - ybar) * (4.0 - ybar)));
}

TEST_CASE("nn variance needs big enough arms") {
  Sample s = line_sample({0.0, 1.0, 2.0}, {0, 1, 1});
  s.outcomes = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(nn_variance(s, 1, euclid(1)), ArmTooSmallError);
}

TEST_CASE("uniform-kernel windows") {
  Sample s = line_sample({0.0, 1.0, 5.0, 9.0}, {0, 0, 1, 1});
  s.outcomes = Eigen::VectorXd(4);
  *s.outcomes << 1.0, 3.0, 2.0, 4.0;

  // wide window: same-arm mean excluding the unit itself
  VarianceEstimate wide = nw_variance(s, 100.0, euclid(1));
  CHECK(wide.u2_hat(0) == doctest::Approx(4.0));  // (1-3)^2
  CHECK(wide.u2_hat(1) == doctest::Approx(4.0));
  CHECK_FALSE(wide.degenerate);

  // two controls at distance 1, h = 2: neighbor mean is the other unit
  VarianceEstimate mid = nw_variance(s, 2.0, euclid(1));
  CHECK(mid.u2_hat(0) == doctest::Approx(4.0));
  CHECK(mid.u2_hat(2) == doctest::Approx(0.0));  // lonely window collapses

  // window smaller than any distance: flagged degenerate
  VarianceEstimate tiny = nw_variance(s, 0.5, euclid(1));
  CHECK(tiny.degenerate);
  CHECK(tiny.u2_hat.isZero());
}

TEST_CASE("robust standard error") {
  Eigen::VectorXd k(2), u2(2);
  k << -1.0, 1.0;
  u2 << 1.0, 1.0;
  CHECK(robust_se(k, u2) == doctest::Approx(std::sqrt(2.0)));
  Eigen::VectorXd k3(3), u33(3);
  k3 << -1.0, 1.0, 0.0;
  u33 << 1.0, 1.0, 99.0;  // unused unit is ignored
  CHECK(robust_se(k3, u33) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("robust se equals working sd under a constant variance match") {
  Eigen::VectorXd k(4);
  k << -0.5, -0.5, 0.5, 0.5;
  Eigen::VectorXd u2 = Eigen::VectorXd::Constant(4, 1.7);
  CHECK(robust_se(k, u2) == doctest::Approx(std::sqrt(k.squaredNorm() * 1.7)));
}

TEST_CASE("mahalanobis norm rescales by inverse standard deviations") {
  Sample s;
  s.covariates.resize(6, 2);
  s.covariates << 0, 0, 2, 0, 4, 0, 0, 8, 2, 8, 4, 8;
  s.treatments.resize(6);
  s.treatments << 0, 0, 0, 1, 1, 1;
  NormSpec m = mahalanobis_norm(s);
  Eigen::VectorXd e1(2), e2(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  // coordinates are uncorrelated by construction, so the norm is diagonal
  CHECK(norm_eval(e1, m) * norm_eval(e2, m) > 0.0);
  // column variances with the n-1 divisor: 16/5 and 96/5
  CHECK(norm_eval(e1, m) ==
        doctest::Approx(1.0 / std::sqrt(16.0 / 5.0)).epsilon(1e-9));
  CHECK(norm_eval(e2, m) ==
        doctest::Approx(1.0 / std::sqrt(96.0 / 5.0)).epsilon(1e-9));
}

TEST_CASE("pipeline on the duplicated two-arm design") {
  // controls at x = 0 with outcomes 0 and 2, treated at x = 1 with 1 and 3;
  // the optimal weights collapse to the difference in means at every mu, so
  // each criterion reports the same estimate with worst-case bias C
  Sample s = line_sample({0.0, 0.0, 1.0, 1.0}, {0, 0, 1, 1});
  s.outcomes = Eigen::VectorXd(4);
  *s.outcomes << 0.0, 2.0, 1.0, 3.0;
  TargetWeights tw = target_weights(TargetKind::cate, s);
  PipelineOptions opt;
  opt.nn_neighbors = 1;
  PipelineReport rep = feasible_pipeline(s, {1.0, 2.0}, euclid(1), tw, 0.05,
                                         0.8, opt);
  CHECK(rep.sigma2_hat == doctest::Approx(2.0));
  REQUIRE(rep.rows.size() == 6);
  for (const PipelineRow& row : rep.rows) {
    CHECK(row.estimate == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(row.maxbias == doctest::Approx(row.lipschitz_constant).epsilon(1e-9));
    CHECK(row.se_homoskedastic == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    CHECK(row.se_robust == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
    double cv = critical_value(row.lipschitz_constant / std::sqrt(2.0), 0.05);
    CHECK(row.critical_value == doctest::Approx(cv).epsilon(1e-9));
    CHECK(row.flci.half_length == doctest::Approx(cv * std::sqrt(2.0)).epsilon(1e-9));
    CHECK(row.lindeberg == doctest::Approx(0.25));
    CHECK(row.lindeberg_warning);  // 0.25 exceeds the 0.1 reporting threshold
  }
}

TEST_CASE("pipeline is deterministic") {
  Sample s = line_sample({0.0, 0.3, 0.9, 1.4, 2.0, 2.2}, {0, 1, 0, 1, 0, 1});
  s.outcomes = Eigen::VectorXd(6);
  *s.outcomes << 0.0, 1.0, 0.5, 2.0, 0.2, 1.4;
  TargetWeights tw = target_weights(TargetKind::catt, s);
  PipelineOptions opt;
  opt.nn_neighbors = 1;
  PipelineReport a = feasible_pipeline(s, {0.7}, euclid(1), tw, 0.05, 0.8, opt);
  PipelineReport b = feasible_pipeline(s, {0.7}, euclid(1), tw, 0.05, 0.8, opt);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    CHECK(a.rows[r].estimate == b.rows[r].estimate);
    CHECK(a.rows[r].delta == b.rows[r].delta);
    CHECK(a.rows[r].maxbias == b.rows[r].maxbias);
    CHECK(a.rows[r].se_robust == b.rows[r].se_robust);
  }
}

TEST_CASE("pipeline rejects designs without outcomes") {
  Sample s = line_sample({0.0, 1.0}, {0, 1});
  TargetWeights tw = target_weights(TargetKind::cate, s);
  CHECK_THROWS_AS(
      feasible_pipeline(s, {1.0}, euclid(1), tw, 0.05, 0.8, PipelineOptions{}),
      DataError);
}
