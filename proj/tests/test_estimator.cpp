#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "honest_ate/alt_estimators.hpp"
#include "honest_ate/errors.hpp"
#include "honest_ate/estimator.hpp"
#include "honest_ate/stats.hpp"
#include "test_helpers.hpp"

using namespace honest_ate;
using test_helpers::line_sample;
using test_helpers::random_design;
using test_helpers::two_point;

namespace {

NormSpec euclid(Eigen::Index dim) { return NormSpec::identity(dim, PNorm::two); }

SolutionPath two_point_path() {
  Sample s = two_point();
  return trace_path(s, {1.0, euclid(1), {}},
                    target_weights(TargetKind::cate, s),
                    VarianceSpec::homoskedastic(1.0), {});
}

}  // namespace

TEST_CASE("two-point weights, bias and sd at any positive mu") {
  SolutionPath path = two_point_path();
  for (double mu : {0.1, 1.0, 7.5}) {
    for (double c : {0.5, 1.0, 3.0}) {
      LinearEstimate est = weights_at(path, mu, c);
      CHECK(est.weights(0) == doctest::Approx(-1.0).epsilon(1e-12));
      CHECK(est.weights(1) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(*est.maxbias == doctest::Approx(c).epsilon(1e-12));
      CHECK(*est.sd == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
      CHECK(*est.delta == doctest::Approx(2.0 * std::sqrt(2.0) * c * mu));
    }
  }
  CHECK_THROWS_AS(weights_at(path, 0.0, 1.0), DegenerateNormalizerError);
}

TEST_CASE("multiplier form reproduces the stationarity-form weights") {
  std::mt19937 rng(808);
  for (int rep = 0; rep < 6; ++rep) {
    Sample s = random_design(rng, 6);
    TargetKind kind = rep % 2 == 0 ? TargetKind::cate : TargetKind::catt;
    SolutionPath path = trace_path(
        s, {1.0, euclid(2), {}}, target_weights(kind, s),
        VarianceSpec::per_arm(test_helpers::random_arm_sigma2(rng),
                              test_helpers::random_arm_sigma2(rng)),
        {});
    std::uniform_real_distribution<double> pick(0.05, 2.5);
    for (int q = 0; q < 4; ++q) {
      double mu = pick(rng) * (1.0 + path.mu_last());
      LinearEstimate a = weights_at(path, mu, 1.0);
      LinearEstimate b = multiplier_weights_at(path, mu, 1.0);
      CHECK((a.weights - b.weights).lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }
}

TEST_CASE("weights approach difference-in-means far along the path") {
  std::mt19937 rng(11);
  Sample s = random_design(rng, 10);
  SolutionPath path =
      trace_path(s, {1.0, euclid(2), {}}, target_weights(TargetKind::cate, s),
                 VarianceSpec::homoskedastic(1.0), {});
  REQUIRE(path.reached_terminal());
  double mu_far = std::max(path.mu_last(), 1.0) * 1e6;
  LinearEstimate est = weights_at(path, mu_far, 1.0);
  LinearEstimate dim = difference_in_means(s);
  CHECK((est.weights - dim.weights).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("criterion formulas") {
  CHECK(criterion_value(3.0, 4.0, Criterion::rmse, 0.05, 0.8) ==
        doctest::Approx(5.0));
  CHECK(criterion_value(0.0, 2.0, Criterion::flci, 0.05, 0.8) ==
        doctest::Approx(2.0 * normal_quantile(0.975) * 2.0).epsilon(1e-9));
  // two-point instance with C = 1: worst-case bias 1, sd sqrt(2)
  double oci = criterion_value(1.0, std::sqrt(2.0), Criterion::oci, 0.05, 0.8);
  CHECK(oci == doctest::Approx(2.0 + std::sqrt(2.0) * (1.6448536 + 0.8416212))
                   .epsilon(1e-6));
}

TEST_CASE("one-sided tuning lands exactly on z_beta + z_{1-alpha}") {
  SolutionPath path = two_point_path();
  TuneResult t = tune(path, Criterion::oci, 1.0, 0.05, 0.8);
  CHECK(t.delta_star == doctest::Approx(2.4864748).epsilon(1e-6));
  CHECK(t.estimate.weights(1) == doctest::Approx(1.0));
}

TEST_CASE("two-point rmse criterion is flat; ties break to small mu") {
  SolutionPath path = two_point_path();
  TuneResult t = tune(path, Criterion::rmse, 1.0, 0.05, 0.8);
  double val = criterion_value(*t.estimate.maxbias, *t.estimate.sd,
                               Criterion::rmse, 0.05, 0.8);
  CHECK(val == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  CHECK(t.mu_star < 1e-6);  // earliest point of the flat stretch
  CHECK(t.estimate.weights(0) == doctest::Approx(-1.0));
}

TEST_CASE("tuned criteria are mutually consistent") {
  std::mt19937 rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    Sample s = random_design(rng, 8);
    SolutionPath path = trace_path(
        s, {1.0, euclid(2), {}}, target_weights(TargetKind::cate, s),
        VarianceSpec::homoskedastic(1.0), {});
    TuneResult rmse = tune(path, Criterion::rmse, 1.0, 0.05, 0.8);
    TuneResult flci = tune(path, Criterion::flci, 1.0, 0.05, 0.8);
    double rmse_at_rmse = criterion_at(path, rmse.delta_star, Criterion::rmse,
                                       1.0, 0.05, 0.8);
    double rmse_at_flci = criterion_at(path, flci.delta_star, Criterion::rmse,
                                       1.0, 0.05, 0.8);
    double flci_at_flci = criterion_at(path, flci.delta_star, Criterion::flci,
                                       1.0, 0.05, 0.8);
    double flci_at_rmse = criterion_at(path, rmse.delta_star, Criterion::flci,
                                       1.0, 0.05, 0.8);
    CHECK(rmse_at_rmse <= rmse_at_flci + 1e-9);
    CHECK(flci_at_flci <= flci_at_rmse + 1e-9);
  }
}

TEST_CASE("mu_for_delta inverts the delta map") {
  std::mt19937 rng(67);
  Sample s = random_design(rng, 8);
  SolutionPath path =
      trace_path(s, {1.0, euclid(2), {}}, target_weights(TargetKind::cate, s),
                 VarianceSpec::homoskedastic(1.0), {});
  for (double mu : {0.2, 1.1, 4.0, 3.0 * (1.0 + path.mu_last())}) {
    double delta = path_point(path, mu, 1.3).delta;
    CHECK(mu_for_delta(path, delta, 1.3) == doctest::Approx(mu).epsilon(1e-9));
  }
}

TEST_CASE("sd equals the modulus derivative along the path") {
  std::mt19937 rng(73);
  Sample s = random_design(rng, 8);
  SolutionPath path =
      trace_path(s, {1.0, euclid(2), {}}, target_weights(TargetKind::cate, s),
                 VarianceSpec::per_arm(1.1, 0.9), {});
  for (double mu : {0.4, 1.7, 5.0}) {
    PathPoint p = path_point(path, mu, 1.0);
    double h = 1e-5 * (1.0 + p.delta);
    double om_hi =
        path_point(path, mu_for_delta(path, p.delta + h, 1.0), 1.0).omega;
    double om_lo =
        path_point(path, mu_for_delta(path, p.delta - h, 1.0), 1.0).omega;
    CHECK(p.sd == doctest::Approx((om_hi - om_lo) / (2.0 * h)).epsilon(1e-5));
    CHECK(p.maxbias ==
          doctest::Approx(0.5 * (p.omega - p.delta * p.sd)).epsilon(1e-9));
  }
}

TEST_CASE("weights are invariant to C; bias and delta scale linearly") {
  std::mt19937 rng(90);
  Sample s = random_design(rng, 8);
  SolutionPath path =
      trace_path(s, {1.0, euclid(2), {}}, target_weights(TargetKind::catt, s),
                 VarianceSpec::homoskedastic(1.0), {});
  double mu = 0.7 * (1.0 + path.mu_last());
  LinearEstimate a = weights_at(path, mu, 1.0);
  LinearEstimate b = weights_at(path, mu, 4.0);
  CHECK((a.weights - b.weights).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(*b.maxbias == doctest::Approx(4.0 * *a.maxbias).epsilon(1e-12));
  CHECK(*b.delta == doctest::Approx(4.0 * *a.delta).epsilon(1e-12));
  CHECK(*b.sd == doctest::Approx(*a.sd).epsilon(1e-12));
}

TEST_CASE("build_ci forms") {
  LinearEstimate est;
  est.weights = Eigen::VectorXd::Zero(2);
  est.estimate = 1.0;
  est.maxbias = 0.0;
  HonestCI ci = build_ci(est, 1.0, 0.05, CiKind::two_sided_flci);
  CHECK(ci.half_length == doctest::Approx(1.959964).epsilon(1e-6));

  est.maxbias = 50.0;
  ci = build_ci(est, 1.0, 0.05, CiKind::two_sided_flci);
  CHECK(ci.half_length ==
        doctest::Approx(50.0 + normal_quantile(0.95)).epsilon(1e-4));

  est.maxbias = 2.0;
  HonestCI lo = build_ci(est, 1.5, 0.05, CiKind::one_sided_lower);
  CHECK(lo.center_or_bound ==
        doctest::Approx(1.0 - 2.0 - normal_quantile(0.95) * 1.5).epsilon(1e-9));
  HonestCI hi = build_ci(est, 1.5, 0.05, CiKind::one_sided_upper);
  CHECK(hi.center_or_bound ==
        doctest::Approx(1.0 + 2.0 + normal_quantile(0.95) * 1.5).epsilon(1e-9));
  CHECK(std::isinf(lo.upper()));
  CHECK(std::isinf(hi.lower()));
}

TEST_CASE("perfect-overlap design has a linear modulus") {
  // duplicate covariates across arms: no bias is possible, omega is linear,
  // the one-sided CI is fully efficient and the FLCI efficiency equals the
  // known Gaussian-location value (z_{1-a}(1-a) + phi(z_{1-a})) / z_{1-a/2}
  Sample s = line_sample({2.0, 2.0}, {0, 1});
  SolutionPath path =
      trace_path(s, {1.0, euclid(1), {}}, target_weights(TargetKind::cate, s),
                 VarianceSpec::homoskedastic(1.0), {});
  PathPoint p1 = path_point(path, 1.0, 1.0);
  PathPoint p2 = path_point(path, 2.0, 1.0);
  CHECK(p1.maxbias == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p2.omega / p2.delta == doctest::Approx(p1.omega / p1.delta));

  EfficiencyBounds eff = efficiency_bounds(path, 1.0, 0.05, 0.8);
  CHECK(eff.oneside == doctest::Approx(1.0).epsilon(1e-9));
  double z = normal_quantile(0.95);
  double expect = (z * 0.95 + normal_pdf(z)) / normal_quantile(0.975);
  CHECK(eff.flci == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("efficiency bounds respect the universal lower bounds") {
  std::mt19937 rng(555);
  for (int rep = 0; rep < 5; ++rep) {
    Sample s = random_design(rng, 8);
    SolutionPath path = trace_path(
        s, {1.0, euclid(2), {}},
        target_weights(rep % 2 == 0 ? TargetKind::cate : TargetKind::catt, s),
        VarianceSpec::homoskedastic(1.0), {});
    EfficiencyBounds eff = efficiency_bounds(path, 1.0, 0.05, 0.8);
    CHECK(eff.oneside >= 0.5 - 1e-9);
    CHECK(eff.oneside <= 1.0 + 1e-9);
    CHECK(eff.flci >= 0.717 - 1e-3);
    CHECK(eff.flci <= 1.0 + 1e-9);
  }
}

TEST_CASE("lindeberg ratio of the two-point weights is one half") {
  Eigen::VectorXd k(2);
  k << -1.0, 1.0;
  CHECK(lindeberg_ratio(k) == doctest::Approx(0.5));
  Eigen::VectorXd solo = Eigen::VectorXd::Zero(5);
  solo(2) = 0.3;
  CHECK(lindeberg_ratio(solo) == doctest::Approx(1.0));
}
