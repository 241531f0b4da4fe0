#include <doctest.h>

#include <cmath>
#include <initializer_list>

#include "honest_ate/stats.hpp"

using namespace honest_ate;

TEST_CASE("normal cdf and quantile invert each other") {
  for (double p : {1e-10, 1e-4, 0.01, 0.2, 0.5, 0.8, 0.975, 0.999999}) {
    double z = normal_quantile(p);
    CHECK(normal_cdf(z) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-12));
  CHECK(normal_quantile(0.8) == doctest::Approx(0.8416212335729143).epsilon(1e-12));
}

TEST_CASE("critical value at zero bias is the two-sided quantile") {
  CHECK(std::abs(critical_value(0.0, 0.05) - 1.959964) < 1e-6);
  CHECK(std::abs(critical_value(0.0, 0.10) - normal_quantile(0.95)) < 1e-10);
}

TEST_CASE("critical value approaches b + z_{1-alpha} for moderate bias") {
  for (double b : {1.5, 2.0, 3.0}) {
    CHECK(std::abs(critical_value(b, 0.05) - (b + 1.644854)) < 5e-4);
  }
}

TEST_CASE("critical value matches the printed application row") {
  CHECK(std::abs(critical_value(1.577, 0.05) - 3.22) < 5e-3);
}

TEST_CASE("critical value residual and monotonicity") {
  for (double b : {0.0, 0.3, 0.7, 1.2, 2.5, 6.0}) {
    double c = critical_value(b, 0.05);
    double resid = normal_cdf(c - b) - normal_cdf(-c - b) - 0.95;
    CHECK(std::abs(resid) < 1e-10);
  }
  double prev = critical_value(0.0, 0.05);
  for (double b = 0.1; b < 4.0; b += 0.1) {
    double cur = critical_value(b, 0.05);
    CHECK(cur > prev);
    prev = cur;
  }
  // cv_alpha(b) >= max(z_{1-alpha/2}, b + z_{1-alpha} - 1e-3) for b >= 1.5
  for (double b = 1.5; b < 5.0; b += 0.25) {
    double c = critical_value(b, 0.05);
    CHECK(c >= normal_quantile(0.975) - 1e-12);
    CHECK(c >= b + normal_quantile(0.95) - 1e-3);
  }
}
