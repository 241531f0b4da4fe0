#include "honest_ate/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "honest_ate/errors.hpp"
#include "honest_ate/stats.hpp"

namespace honest_ate {

namespace {

constexpr double kGolden = 0.6180339887498949;

double estimate_from_weights(const Eigen::VectorXd& k,
                             const Eigen::VectorXd& y) {
  return k.dot(y);
}

}  // namespace

double HonestCI::lower() const {
  switch (kind) {
    case CiKind::two_sided_flci: return center_or_bound - half_length;
    case CiKind::one_sided_lower: return center_or_bound;
    case CiKind::one_sided_upper: return -std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

double HonestCI::upper() const {
  switch (kind) {
    case CiKind::two_sided_flci: return center_or_bound + half_length;
    case CiKind::one_sided_lower: return std::numeric_limits<double>::infinity();
    case CiKind::one_sided_upper: return center_or_bound;
  }
  return 0.0;
}

PathPoint path_point(const SolutionPath& path, double mu, double C) {
  if (C <= 0.0) throw ConfigError("Lipschitz constant must be positive here");
  KnotSummary s = path.summary_at(mu);
  PathPoint p;
  p.mu = mu;
  p.delta = 2.0 * C * std::sqrt(std::max(s.qa, 0.0));
  p.omega = 2.0 * C * s.lw;
  if (s.nm <= 0.0) {
    // mu = 0 limit: first-segment slopes give sd; qa/nm vanishes, so the
    // bias limit is C times the modulus sum itself.
    const KnotSummary& k0 = path.knots().front();
    p.sd = std::sqrt(k0.qc) / k0.dnm;
    p.maxbias = C * k0.lw;
    return p;
  }
  p.sd = std::sqrt(std::max(s.qa, 0.0)) / s.nm;
  p.maxbias = std::max(C * (s.lw - s.qa / s.nm), 0.0);
  return p;
}

double mu_for_delta(const SolutionPath& path, double delta, double C) {
  if (delta < 0.0) throw NumericalError("delta must be nonnegative");
  double target_qa = delta * delta / (4.0 * C * C);
  const auto& knots = path.knots();
  std::size_t seg = knots.size() - 1;
  for (std::size_t t = 0; t + 1 < knots.size(); ++t) {
    if (knots[t + 1].qa >= target_qa) {
      seg = t;
      break;
    }
  }
  const KnotSummary& k = knots[seg];
  // qa(s) = qa + 2 qb s + qc s^2 = target
  double aa = k.qc, bb = 2.0 * k.qb, ccq = k.qa - target_qa;
  double s = 0.0;
  if (std::abs(aa) < 1e-300) {
    s = bb > 0.0 ? -ccq / bb : 0.0;
  } else {
    double disc = bb * bb - 4.0 * aa * ccq;
    s = (-bb + std::sqrt(std::max(disc, 0.0))) / (2.0 * aa);
  }
  return std::max(k.mu + s, 0.0);
}

LinearEstimate weights_at(const SolutionPath& path, double mu, double C,
                          const std::optional<Eigen::VectorXd>& outcomes) {
  PathState st = path.state_at(mu);
  const double s20 = path.sigma2_0(), s21 = path.sigma2_1();
  double normalizer = 0.0;
  for (Eigen::Index i : path.distances().treated_rows) normalizer += st.m(i) / s21;
  if (!(normalizer > 0.0)) {
    throw DegenerateNormalizerError(
        "optimal weights are undefined at mu=0; query a positive mu");
  }
  const Eigen::Index n = path.n();
  LinearEstimate est;
  est.weights.resize(n);
  for (Eigen::Index u : path.distances().control_rows) {
    est.weights(u) = -st.m(u) / s20 / normalizer;
  }
  for (Eigen::Index u : path.distances().treated_rows) {
    est.weights(u) = st.m(u) / s21 / normalizer;
  }
  PathPoint p = path_point(path, mu, C > 0.0 ? C : 1.0);
  est.maxbias = C > 0.0 ? p.maxbias : 0.0;
  est.sd = p.sd;
  est.delta = C > 0.0 ? p.delta : 0.0;
  est.provenance = "solution-path weights at mu=" + std::to_string(mu);
  if (outcomes) est.estimate = estimate_from_weights(est.weights, *outcomes);
  return est;
}

LinearEstimate multiplier_weights_at(
    const SolutionPath& path, double mu, double C,
    const std::optional<Eigen::VectorXd>& outcomes) {
  if (!(mu > 0.0)) {
    throw DegenerateNormalizerError("multiplier weights need mu > 0");
  }
  PathState st = path.state_at(mu);
  const double w0 = path.w0(), w1 = path.w1();
  const Eigen::Index n = path.n();
  LinearEstimate est;
  est.weights.setZero(n);
  for (Eigen::Index i : path.distances().treated_rows) est.weights(i) = w1;
  for (Eigen::Index j : path.distances().control_rows) est.weights(j) = -w0;
  for (const MultiplierEntry& e : st.lam1) {
    est.weights(path.distances().treated_rows[e.i]) += e.value / mu;
  }
  for (const MultiplierEntry& e : st.lam0) {
    est.weights(path.distances().control_rows[e.j]) -= e.value / mu;
  }
  PathPoint p = path_point(path, mu, C > 0.0 ? C : 1.0);
  est.maxbias = C > 0.0 ? p.maxbias : 0.0;
  est.sd = p.sd;
  est.delta = C > 0.0 ? p.delta : 0.0;
  est.provenance = "multiplier-form weights at mu=" + std::to_string(mu);
  if (outcomes) est.estimate = estimate_from_weights(est.weights, *outcomes);
  return est;
}

double criterion_value(double maxbias, double sd, Criterion which,
                       double alpha, double beta) {
  switch (which) {
    case Criterion::rmse:
      return std::sqrt(maxbias * maxbias + sd * sd);
    case Criterion::flci:
      return 2.0 * critical_value(maxbias / sd, alpha) * sd;
    case Criterion::oci:
      return 2.0 * maxbias +
             sd * (normal_quantile(1.0 - alpha) + normal_quantile(beta));
  }
  return 0.0;
}

double criterion_at(const SolutionPath& path, double delta, Criterion which,
                    double C, double alpha, double beta) {
  double mu = mu_for_delta(path, delta, C);
  PathPoint p = path_point(path, mu, C);
  return criterion_value(p.maxbias, p.sd, which, alpha, beta);
}

namespace {

// Golden-section minimization over [lo, hi]; assumes continuity only. Also
// samples both endpoints. Returns (arg, value).
std::pair<double, double> golden_min(const std::function<double(double)>& fn,
                                     double lo, double hi, double tol) {
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  while (b - a > tol * (1.0 + std::abs(a) + std::abs(b))) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = fn(x2);
    }
  }
  double xm = 0.5 * (a + b);
  double fm = fn(xm);
  double fl = fn(lo), fh = fn(hi);
  double best_x = xm, best_f = fm;
  if (fh < best_f) { best_f = fh; best_x = hi; }
  // flat stretches resolve to the left end
  if (fl <= best_f + 1e-12 * (1.0 + std::abs(best_f))) {
    best_f = std::min(fl, best_f);
    best_x = lo;
  }
  return {best_x, best_f};
}

}  // namespace

TuneResult tune(const SolutionPath& path, Criterion which, double C,
                double alpha, double beta,
                const std::optional<Eigen::VectorXd>& outcomes) {
  TuneResult out;
  if (which == Criterion::oci) {
    // Minimax one-sided CI: the excess-length-optimal delta in closed form.
    out.delta_star = normal_quantile(beta) + normal_quantile(1.0 - alpha);
    out.mu_star = mu_for_delta(path, out.delta_star, C);
    out.estimate = weights_at(path, out.mu_star, C, outcomes);
    out.estimate.delta = out.delta_star;
    return out;
  }

  auto value_at_mu = [&](double mu) {
    PathPoint p = path_point(path, mu, C);
    if (!(p.sd > 0.0)) return std::numeric_limits<double>::infinity();
    return criterion_value(p.maxbias, p.sd, which, alpha, beta);
  };

  const auto& knots = path.knots();
  const double mu_last = knots.back().mu;
  const double mu_floor =
      knots.size() > 1 ? knots[1].mu * 1e-9 : std::max(mu_last, 1.0) * 1e-9;

  double best_mu = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  auto offer = [&](double mu, double val) {
    // ties resolve toward the smallest mu
    if (val < best_val * (1.0 - 1e-12) ||
        (val <= best_val * (1.0 + 1e-12) && mu < best_mu)) {
      best_val = std::min(val, best_val);
      best_mu = mu;
    }
  };

  for (std::size_t t = 0; t + 1 < knots.size(); ++t) {
    double lo = std::max(knots[t].mu, mu_floor);
    double hi = knots[t + 1].mu;
    if (hi <= lo) continue;
    auto [xm, fm] = golden_min(value_at_mu, lo, hi, 1e-10);
    offer(xm, fm);
  }
  {
    // Terminal segment, searched in log(mu); criteria flatten toward the
    // difference-in-means limit, so a generous cap stands in for infinity.
    double lo = std::max(mu_last, mu_floor);
    double cap = std::max(1.0, mu_last) * 1e9;
    auto in_log = [&](double u) { return value_at_mu(std::exp(u)); };
    auto [um, fm] = golden_min(in_log, std::log(std::max(lo, 1e-300)),
                               std::log(cap), 1e-12);
    offer(std::exp(um), fm);
  }
  if (!std::isfinite(best_val)) {
    throw NotBracketedError("criterion has no finite value along the path");
  }
  out.mu_star = best_mu;
  out.delta_star = path_point(path, best_mu, C).delta;
  out.estimate = weights_at(path, best_mu, C, outcomes);
  out.estimate.delta = out.delta_star;
  return out;
}

HonestCI build_ci(const LinearEstimate& estimate, double se, double alpha,
                  CiKind kind, double beta) {
  if (!(se > 0.0)) throw NumericalError("standard error must be positive");
  if (!estimate.estimate) {
    throw DataError("building a CI requires outcomes (an estimate)");
  }
  double b = estimate.maxbias.value_or(0.0);
  HonestCI ci;
  ci.kind = kind;
  ci.alpha = alpha;
  ci.beta = beta;
  ci.se_used = se;
  switch (kind) {
    case CiKind::two_sided_flci:
      ci.critical_value = critical_value(b / se, alpha);
      ci.center_or_bound = *estimate.estimate;
      ci.half_length = ci.critical_value * se;
      break;
    case CiKind::one_sided_lower:
      ci.critical_value = normal_quantile(1.0 - alpha);
      ci.center_or_bound = *estimate.estimate - b - ci.critical_value * se;
      break;
    case CiKind::one_sided_upper:
      ci.critical_value = normal_quantile(1.0 - alpha);
      ci.center_or_bound = *estimate.estimate + b + ci.critical_value * se;
      break;
  }
  return ci;
}

namespace {

// Adaptive Simpson quadrature.
double simpson(const std::function<double(double)>& fn, double a, double m,
               double b, double fa, double fm, double fb, double whole,
               double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = fn(lm), frm = fn(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(fn, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson(fn, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& fn, double a, double b,
                 double tol) {
  double m = 0.5 * (a + b);
  double fa = fn(a), fm = fn(m), fb = fn(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(fn, a, m, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

EfficiencyBounds efficiency_bounds(const SolutionPath& path, double C,
                                   double alpha, double beta) {
  EfficiencyBounds out;
  auto omega_of_delta = [&](double delta) {
    if (delta <= 0.0) return 0.0;
    double mu = mu_for_delta(path, delta, C);
    return path_point(path, mu, C).omega;
  };

  const double z1a = normal_quantile(1.0 - alpha);
  {
    double delta = normal_quantile(beta) + z1a;
    double mu = mu_for_delta(path, delta, C);
    PathPoint p = path_point(path, mu, C);
    double denom = p.omega + delta * p.sd;
    out.oneside = denom > 0.0 ? omega_of_delta(2.0 * delta) / denom : 1.0;
  }
  {
    TuneResult chi = tune(path, Criterion::flci, C, alpha, beta);
    PathPoint p = path_point(path, chi.mu_star, C);
    double ratio = std::max(p.omega / (2.0 * p.sd) - p.delta / 2.0, 0.0);
    double denom = 2.0 * critical_value(ratio, alpha) * p.sd;
    auto integrand = [&](double z) {
      return omega_of_delta(2.0 * (z1a - z)) * normal_pdf(z);
    };
    double numer = integrate(integrand, -8.0, z1a, 1e-11);
    out.flci = denom > 0.0 ? numer / denom : 1.0;
  }
  return out;
}

double lindeberg_ratio(const Eigen::VectorXd& weights) {
  double ss = weights.squaredNorm();
  if (ss <= 0.0) return 0.0;
  return weights.array().square().maxCoeff() / ss;
}

}  // namespace honest_ate
