#ifndef HONEST_ATE_STATS_HPP
#define HONEST_ATE_STATS_HPP

namespace honest_ate {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, computed via erfc. Absolute error below 1e-15.
double normal_cdf(double x);

/// Standard normal quantile. Rational initial guess refined by Halley steps
/// on the CDF; absolute error below 1e-12 for p in (1e-300, 1-1e-16).
double normal_quantile(double p);

/// Bias-aware critical value: the 1-alpha quantile of |N(b,1)|, i.e. the
/// solution c of Phi(c-b) - Phi(-c-b) = 1-alpha, found by bisection with
/// residual below 1e-10. cv(0, alpha) equals the usual two-sided normal
/// critical value; for large b it approaches b + z_{1-alpha}.
double critical_value(double b, double alpha);

}  // namespace honest_ate

#endif  // HONEST_ATE_STATS_HPP
