#include "honest_ate/stats.hpp"

#include <cmath>
#include <limits>

#include "honest_ate/errors.hpp"

namespace honest_ate {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
}  // namespace

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw NumericalError("normal_quantile: p must lie strictly in (0,1)");
  }
  // Acklam's rational approximation, then Halley refinement on the CDF.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 3; ++it) {
    double e = normal_cdf(x) - p;
    double u = e / normal_pdf(x);
    x = x - u / (1.0 + 0.5 * x * u);  // Halley step
  }
  return x;
}

double critical_value(double b, double alpha) {
  if (!(b >= 0.0) || !std::isfinite(b)) {
    throw NumericalError("critical_value: b must be finite and nonnegative");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw NumericalError("critical_value: alpha must lie in (0,1)");
  }
  auto coverage = [b](double cc) {
    return normal_cdf(cc - b) - normal_cdf(-cc - b);
  };
  const double target = 1.0 - alpha;
  double lo = 0.0;
  double hi = b + normal_quantile(1.0 - alpha / 2.0) + 1.0;
  while (coverage(hi) < target) hi *= 2.0;
  // coverage is strictly increasing in c, so plain bisection suffices.
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (coverage(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace honest_ate
