// Acceptance gate: one pass/fail line per criterion. Criteria tied to the
// job-training dataset run only when the user supplies the file (see
// tools/fetch_nsw.py); they are reported as SKIP otherwise.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "honest_ate/alt_estimators.hpp"
#include "honest_ate/csv.hpp"
#include "honest_ate/estimator.hpp"
#include "honest_ate/modulus_qp.hpp"
#include "honest_ate/report.hpp"
#include "honest_ate/serialize.hpp"
#include "honest_ate/solution_path.hpp"
#include "honest_ate/stats.hpp"
#include "honest_ate/variance.hpp"

using namespace honest_ate;
using Clock = std::chrono::steady_clock;

namespace {

struct Gate {
  int failures = 0;
  void report(int num, bool ok, const std::string& name,
              const std::string& detail = "") {
    std::cout << "criterion " << num << " [" << (ok ? "PASS" : "FAIL") << "] "
              << name;
    if (!detail.empty()) std::cout << " -- " << detail;
    std::cout << "\n";
    if (!ok) ++failures;
  }
  void skip(int num, const std::string& name, const std::string& why) {
    std::cout << "criterion " << num << " [SKIP] " << name << " -- " << why
              << "\n";
  }
};

NormSpec euclid(Eigen::Index dim) { return NormSpec::identity(dim, PNorm::two); }

Sample random_design(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Sample s;
  s.covariates.resize(n, 2);
  s.treatments.resize(n);
  for (int i = 0; i < n; ++i) {
    s.covariates(i, 0) = unif(rng);
    s.covariates(i, 1) = unif(rng);
    s.treatments(i) = i < n / 2 ? 0 : 1;
  }
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(s.treatments(i), s.treatments(pick(rng)));
  }
  if (s.n_treated() == 0) s.treatments(0) = 1;
  if (s.n_control() == 0) s.treatments(0) = 0;
  return s;
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

void criterion_1(Gate& gate) {
  Sample s;
  s.covariates.resize(2, 1);
  s.covariates << 0.0, 1.0;
  s.treatments.resize(2);
  s.treatments << 0, 1;
  TargetWeights tw = target_weights(TargetKind::cate, s);

  bool ok = true;
  std::ostringstream detail;
  // warm-up, then timed trace + queries
  SolutionPath warm =
      trace_path(s, {1.0, euclid(1), {}}, tw, VarianceSpec::homoskedastic(1.0), {});
  Clock::time_point t0 = Clock::now();
  SolutionPath path =
      trace_path(s, {1.0, euclid(1), {}}, tw, VarianceSpec::homoskedastic(1.0), {});
  for (double mu : {0.25, 1.0, 3.0, 11.0}) {
    LinearEstimate est = weights_at(path, mu, 1.0);
    ok = ok && std::abs(est.weights(0) + 1.0) <= 1e-9;
    ok = ok && std::abs(est.weights(1) - 1.0) <= 1e-9;
    ok = ok && std::abs(*est.maxbias - 1.0) <= 1e-9;
    ok = ok && std::abs(*est.sd - std::sqrt(2.0)) <= 1e-9;
  }
  double ms = ms_since(t0);
  ok = ok && ms < 1.0;
  detail << "path + 4 queries in " << ms << " ms";
  gate.report(1, ok, "two-point analytic instance", detail.str());
}

void criterion_2(Gate& gate) {
  Clock::time_point t0 = Clock::now();
  std::mt19937 rng(20260811);
  std::uniform_real_distribution<double> sig(0.5, 2.0);
  double worst_rel = 0.0, worst_kkt = 0.0;
  bool ok = true;
  int solved = 0;
  for (int n : {4, 6, 8}) {
    for (int rep = 0; rep < 50 && ok; ++rep) {
      Sample s = random_design(rng, n);
      TargetWeights tw = target_weights(TargetKind::cate, s);
      VarianceSpec var = VarianceSpec::per_arm(sig(rng), sig(rng));
      LipschitzSpec lip{1.0, euclid(2), {}};
      SolutionPath path = trace_path(s, lip, tw, var, {});
      Eigen::MatrixXd all_pairs = pairwise_distances(s, lip.norm);
      std::uniform_real_distribution<double> pick(0.02, 4.0);
      for (int q = 0; q < 20; ++q) {
        double mu = pick(rng) * (1.0 + path.mu_last());
        PathPoint p = path_point(path, mu, 1.0);
        ModulusSolution sol = solve_modulus_qp(s, lip, tw, var, p.delta);
        double rel = std::abs(sol.objective - p.omega) /
                     std::max(1.0, std::abs(sol.objective));
        worst_rel = std::max(worst_rel, rel);
        KktReport rep_k = kkt_report(path, path.state_at(mu), &all_pairs);
        worst_kkt = std::max(worst_kkt, rep_k.worst(mu));
        ++solved;
      }
      ok = ok && worst_rel <= 1e-6 && worst_kkt <= 1e-8;
    }
  }
  double sec = ms_since(t0) / 1000.0;
  ok = ok && sec < 60.0;
  std::ostringstream detail;
  detail << solved << " oracle solves, worst rel err " << worst_rel
         << ", worst KKT " << worst_kkt << ", " << sec << " s";
  gate.report(2, ok, "path-oracle equivalence on random designs", detail.str());
}

void criterion_3(Gate& gate) {
  bool ok = std::abs(critical_value(0.0, 0.05) - 1.959964) <= 1e-6;
  for (double b : {1.5, 2.0, 3.0}) {
    ok = ok && std::abs(critical_value(b, 0.05) - (b + 1.644854)) < 5e-4;
  }
  ok = ok && std::abs(critical_value(1.577, 0.05) - 3.22) <= 5e-3;
  gate.report(3, ok, "bias-aware critical values");
}

void criterion_4(Gate& gate) {
  std::mt19937 rng(777);
  bool ok = true;
  double worst = 0.0;
  int done = 0;
  while (done < 20) {
    Sample s = random_design(rng, 8 + 2 * (done % 3));
    NormSpec norm = euclid(2);
    DistanceMatrices dist = cross_distances(s, norm);
    // require unique nearest matches in both directions
    bool unique = true;
    for (Eigen::Index i = 0; i < dist.d0.rows() && unique; ++i) {
      Eigen::VectorXd row = dist.d0.row(i);
      std::sort(row.data(), row.data() + row.size());
      if (row.size() > 1 && row(1) - row(0) < 1e-6) unique = false;
    }
    for (Eigen::Index j = 0; j < dist.d0.cols() && unique; ++j) {
      Eigen::VectorXd col = dist.d0.col(j);
      std::sort(col.data(), col.data() + col.size());
      if (col.size() > 1 && col(1) - col(0) < 1e-6) unique = false;
    }
    if (!unique) continue;
    ++done;
    TargetKind kind = done % 2 == 0 ? TargetKind::cate : TargetKind::catt;
    TargetWeights tw = target_weights(kind, s);
    SolutionPath path =
        trace_path(s, {1.0, norm, {}}, tw, VarianceSpec::homoskedastic(1.0), {});
    double mu_small =
        path.knots().size() > 1 ? 0.5 * path.knots()[1].mu : 1.0;
    LinearEstimate opt = weights_at(path, mu_small, 1.0);
    LinearEstimate match = matching_weights(s, dist, 1, tw);
    worst = std::max(worst,
                     (opt.weights - match.weights).lpNorm<Eigen::Infinity>());
    ok = ok && worst <= 1e-10;
  }
  std::ostringstream detail;
  detail << "worst deviation " << worst;
  gate.report(4, ok, "single-match limit at the start of the path", detail.str());
}

void criterion_5(Gate& gate) {
  std::mt19937 rng(888);
  bool ok = true;
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    Sample s = random_design(rng, 10);
    TargetWeights tw = target_weights(TargetKind::cate, s);
    SolutionPath path = trace_path(s, {1.0, euclid(2), {}}, tw,
                                   VarianceSpec::homoskedastic(1.0), {});
    if (!path.reached_terminal()) {
      ok = false;
      break;
    }
    double mu = std::max(path.mu_last(), 1.0) * 1e6;
    LinearEstimate est = weights_at(path, mu, 1.0);
    LinearEstimate dim = difference_in_means(s);
    worst = std::max(worst,
                     (est.weights - dim.weights).lpNorm<Eigen::Infinity>());
  }
  ok = ok && worst <= 1e-6;
  std::ostringstream detail;
  detail << "worst deviation " << worst;
  gate.report(5, ok, "difference-in-means limit far along the path", detail.str());
}

void criterion_6(Gate& gate) {
  std::mt19937 rng(999);
  bool ok = true;
  double worst = 0.0;
  for (int rep = 0; rep < 20 && ok; ++rep) {
    Sample s = random_design(rng, 6 + 2 * (rep % 3));
    TargetKind kind = rep % 2 == 0 ? TargetKind::cate : TargetKind::catt;
    TargetWeights tw = target_weights(kind, s);
    LipschitzSpec lip{1.0 + 0.5 * (rep % 3), euclid(2), {}};
    SolutionPath path =
        trace_path(s, {1.0, lip.norm, {}}, tw, VarianceSpec::homoskedastic(1.0), {});
    for (Criterion crit : {Criterion::rmse, Criterion::flci, Criterion::oci}) {
      TuneResult t = tune(path, crit, lip.constant, 0.05, 0.8);
      double lp = worst_case_bias_lp(t.estimate.weights, s, lip, tw);
      double closed = *t.estimate.maxbias;
      double rel = std::abs(lp - closed) / std::max(1e-12, std::abs(closed));
      worst = std::max(worst, rel);
      ok = ok && rel <= 1e-6;
    }
  }

  // dense grid oracle on n = 3 designs
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 4 && ok; ++rep) {
    Sample s;
    s.covariates.resize(3, 1);
    s.covariates << unif(rng), unif(rng), unif(rng);
    s.treatments.resize(3);
    s.treatments << 0, 1, rep % 2;
    TargetWeights tw = target_weights(TargetKind::cate, s);
    DistanceMatrices dist = cross_distances(s, euclid(1));
    LinearEstimate est = matching_weights(s, dist, 1, tw);
    LipschitzSpec lip{1.0, euclid(1), {}};
    double lp = worst_case_bias_lp(est.weights, s, lip, tw);
    Eigen::MatrixXd cost = pairwise_distances(s, lip.norm);
    double diam = cost.maxCoeff();
    const int grid = 41;
    double step = 2.0 * diam / (grid - 1);
    auto arm_max = [&](const Eigen::VectorXd& c) {
      double best = -1e300;
      for (int a = 0; a < grid; ++a) {
        double fa = -diam + a * step;
        for (int b = 0; b < grid; ++b) {
          double fb = -diam + b * step;
          double fc = -(fa + fb);
          if (std::abs(fa - fb) > cost(0, 1) + 1e-12) continue;
          if (std::abs(fa - fc) > cost(0, 2) + 1e-12) continue;
          if (std::abs(fb - fc) > cost(1, 2) + 1e-12) continue;
          best = std::max(best, c(0) * fa + c(1) * fb + c(2) * fc);
        }
      }
      return best;
    };
    Eigen::VectorXd c1(3), c0(3);
    for (Eigen::Index u = 0; u < 3; ++u) {
      c1(u) = (s.treatments(u) == 1 ? est.weights(u) : 0.0) - tw.weights(u);
      c0(u) = (s.treatments(u) == 0 ? est.weights(u) : 0.0) + tw.weights(u);
    }
    double grid_val = arm_max(c1) + arm_max(c0);
    double bound = (c1.cwiseAbs().sum() + c0.cwiseAbs().sum()) * 3.0 * step;
    ok = ok && lp >= grid_val - 1e-9 && lp <= grid_val + bound;
  }
  std::ostringstream detail;
  detail << "worst closed-form vs LP rel err " << worst;
  gate.report(6, ok, "bias LP cross-checks", detail.str());
}

void criterion_7(Gate& gate) {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> sig(0.5, 2.0);
  bool ok = true;
  double worst_eff1 = 1.0, worst_eff2 = 1.0;
  for (int rep = 0; rep < 100 && ok; ++rep) {
    int n = 4 + rep % 7;
    Sample s = random_design(rng, n);
    TargetKind kind = rep % 2 == 0 ? TargetKind::cate : TargetKind::catt;
    TargetWeights tw = target_weights(kind, s);
    VarianceSpec var = VarianceSpec::per_arm(sig(rng), sig(rng));
    SolutionPath path = trace_path(s, {1.0, euclid(2), {}}, tw, var, {});

    double mu_hi = std::max(path.mu_last(), 1.0) * 32.0;
    double prev_delta = -1.0, prev_omega = -1.0, prev_slope = 1e300;
    double prev_bias = -1.0, prev_sd = 1e300;
    for (int g = 0; g <= 40; ++g) {
      double mu = mu_hi * g / 40.0;
      PathPoint p = path_point(path, mu, 1.0);
      if (p.delta < prev_delta - 1e-10) ok = false;  // delta(mu) nondecreasing
      if (g > 0) {
        double slope = (p.omega - prev_omega) / std::max(p.delta - prev_delta, 1e-300);
        if (p.delta > prev_delta + 1e-12) {
          if (p.omega < prev_omega - 1e-9) ok = false;     // omega nondecreasing
          if (slope > prev_slope + 1e-7) ok = false;       // omega concave
          prev_slope = slope;
        }
        if (p.maxbias < prev_bias - 1e-9) ok = false;      // bias monotone
        if (p.sd > prev_sd + 1e-9) ok = false;             // sd monotone
      }
      prev_delta = p.delta;
      prev_omega = p.omega;
      prev_bias = p.maxbias;
      prev_sd = p.sd;
    }
    EfficiencyBounds eff = efficiency_bounds(path, 1.0, 0.05, 0.8);
    worst_eff1 = std::min(worst_eff1, eff.oneside);
    worst_eff2 = std::min(worst_eff2, eff.flci);
    ok = ok && eff.oneside >= 0.5 - 1e-9 && eff.flci >= 0.717 - 1e-3;
  }
  std::ostringstream detail;
  detail << "min one-sided eff " << worst_eff1 << ", min FLCI eff " << worst_eff2;
  gate.report(7, ok, "property suite on 100 random instances", detail.str());
}

// --------------------------------------------------------------------------
// Conditional application criteria.

struct NswData {
  Sample sample;
  NormSpec norm_main;
};

bool load_nsw(const std::string& path, NswData* out, std::string* why) {
  std::ifstream probe(path);
  if (!probe.good()) {
    *why = "dataset not supplied at " + path + " (see tools/fetch_nsw.py)";
    return false;
  }
  try {
    CsvTable t = read_csv(path);
    std::vector<std::string> covs = {"age",     "education", "black",
                                     "hispanic", "married",  "re74",
                                     "re75",    "emp74",     "emp75"};
    out->sample = sample_from_csv(t, "re78", "treated", covs);
    validate_sample(out->sample);
    Eigen::VectorXd diag(9);
    diag << 0.15, 0.60, 2.50, 2.50, 2.50, 0.50, 0.50, 0.10, 0.10;
    out->norm_main = NormSpec::diagonal(diag, PNorm::one);
    return true;
  } catch (const std::exception& e) {
    *why = std::string("failed to load dataset: ") + e.what();
    return false;
  }
}

bool near(double got, double want, double tol, std::ostringstream& log,
          const std::string& label) {
  bool ok = std::abs(got - want) <= tol;
  if (!ok) {
    log << " " << label << "=" << got << " (want " << want << "+-" << tol << ")";
  }
  return ok;
}

void criteria_8_9(Gate& gate) {
  const char* env = std::getenv("NSW_CSV");
  std::string path = env != nullptr ? env : "data/nsw_psid.csv";
  NswData data;
  std::string why;
  if (!load_nsw(path, &data, &why)) {
    gate.skip(8, "application table reproduction", why);
    gate.skip(9, "application FLCI efficiency", why);
    return;
  }
  Clock::time_point t0 = Clock::now();
  std::ostringstream log;
  bool ok = data.sample.n() == 2675 && data.sample.n_treated() == 185;

  TargetWeights tw = target_weights(TargetKind::catt, data.sample);
  PipelineOptions opt;
  opt.method = VarianceMethod::nn;
  opt.nn_neighbors = 3;
  opt.metric = VarianceMetric::mahalanobis;
  opt.se_for_cv = SeChoice::robust;
  PipelineReport rep = feasible_pipeline(data.sample, {1.0}, data.norm_main,
                                         tw, 0.05, 0.8, opt);
  const double tol = 0.02;
  auto row_of = [&](Criterion c) -> const PipelineRow& {
    for (const PipelineRow& r : rep.rows) {
      if (r.criterion == c) return r;
    }
    throw std::runtime_error("row missing");
  };
  {
    const PipelineRow& r = row_of(Criterion::rmse);
    ok = near(r.delta, 1.86, tol, log, "rmse.delta") && ok;
    ok = near(r.estimate, 0.94, tol, log, "rmse.est") && ok;
    ok = near(r.maxbias, 1.64, tol, log, "rmse.bias") && ok;
    ok = near(r.se_homoskedastic, 1.53, tol, log, "rmse.hom") && ok;
    ok = near(r.se_robust, 1.04, tol, log, "rmse.rob") && ok;
    ok = near(r.critical_value, 3.22, tol, log, "rmse.cv") && ok;
  }
  {
    const PipelineRow& r = row_of(Criterion::flci);
    ok = near(r.delta, 3.30, tol, log, "flci.delta") && ok;
    ok = near(r.estimate, 0.94, tol, log, "flci.est") && ok;
    ok = near(r.maxbias, 1.81, tol, log, "flci.bias") && ok;
    ok = near(r.se_homoskedastic, 1.40, tol, log, "flci.hom") && ok;
    ok = near(r.se_robust, 0.96, tol, log, "flci.rob") && ok;
    ok = near(r.critical_value, 3.52, tol, log, "flci.cv") && ok;
  }
  {
    const PipelineRow& r = row_of(Criterion::oci);
    ok = near(r.delta, 2.49, tol, log, "oci.delta") && ok;
    ok = near(r.estimate, 0.98, tol, log, "oci.est") && ok;
    ok = near(r.maxbias, 1.71, tol, log, "oci.bias") && ok;
    ok = near(r.se_homoskedastic, 1.47, tol, log, "oci.hom") && ok;
    ok = near(r.se_robust, 1.00, tol, log, "oci.rob") && ok;
    ok = near(r.critical_value, 3.36, tol, log, "oci.cv") && ok;
  }

  // small-mu path limit of the point estimate
  {
    const SolutionPath& p = *rep.path;
    double mu_small = p.knots().size() > 1 ? 0.5 * p.knots()[1].mu : 1e-6;
    LinearEstimate est = weights_at(p, mu_small, 1.0, data.sample.outcomes);
    ok = near(*est.estimate, 1.41, tol, log, "small-mu est") && ok;
  }

  // matching block
  {
    DistanceMatrices dist = cross_distances(data.sample, data.norm_main);
    VarianceSpec working = VarianceSpec::homoskedastic(rep.sigma2_hat);
    NormSpec var_norm = mahalanobis_norm(data.sample);
    VarianceEstimate var = nn_variance(data.sample, 3, var_norm);
    LipschitzSpec lip{1.0, data.norm_main, {}};
    std::vector<MatchingProfileRow> profile = matching_profile(
        data.sample, dist, 1, 25, working, lip, tw, TiePolicy::lowest_index);
    auto check_row = [&](const MatchingProfileRow& row, double est, double bias,
                         double hom, double rob, double cv,
                         const std::string& tag) {
      ok = near(*row.estimate.estimate, est, tol, log, tag + ".est") && ok;
      ok = near(*row.estimate.maxbias, bias, tol, log, tag + ".bias") && ok;
      ok = near(*row.estimate.sd, hom, tol, log, tag + ".hom") && ok;
      double se = robust_se(row.estimate.weights, var.u2_hat);
      ok = near(se, rob, tol, log, tag + ".rob") && ok;
      ok = near(critical_value(*row.estimate.maxbias / se, 0.05), cv, tol, log,
                tag + ".cv") && ok;
    };
    check_row(profile[0], 1.39, 1.48, 2.01, 1.11, 2.98, "match1");
    MatchingTuneResult m_rmse = tune_matching(profile, Criterion::rmse, 0.05, 0.8);
    if (m_rmse.m_star != 1) {
      ok = false;
      log << " rmse-optimal M=" << m_rmse.m_star << " (want 1)";
    }
    MatchingTuneResult m_flci = tune_matching(profile, Criterion::flci, 0.05, 0.8);
    if (m_flci.m_star != 18) {
      ok = false;
      log << " flci-optimal M=" << m_flci.m_star << " (want 18)";
    } else {
      check_row(profile[17], 1.26, 2.21, 1.39, 0.89, 4.12, "match18");
    }
    MatchingTuneResult m_oci = tune_matching(profile, Criterion::oci, 0.05, 0.8);
    if (m_oci.m_star != 17) {
      ok = false;
      log << " oci-optimal M=" << m_oci.m_star << " (want 17)";
    } else {
      check_row(profile[16], 1.32, 2.16, 1.42, 0.89, 4.09, "match17");
    }
  }

  // sensitivity: stable positive estimates for C >= 0.2, difference in
  // means territory below
  {
    PipelineOptions sens_opt = opt;
    sens_opt.criteria = {Criterion::rmse};
    PipelineReport sens =
        feasible_pipeline(data.sample, {0.05, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0},
                          data.norm_main, tw, 0.05, 0.8, sens_opt, rep.path);
    for (const PipelineRow& r : sens.rows) {
      if (r.lipschitz_constant < 0.1) {
        if (r.estimate >= 0.0) {
          ok = false;
          log << " C=" << r.lipschitz_constant << " estimate " << r.estimate
              << " (want negative)";
        }
      } else if (r.lipschitz_constant >= 0.2) {
        if (r.estimate < 0.94 - tol || r.estimate > 1.15 + tol) {
          ok = false;
          log << " C=" << r.lipschitz_constant << " estimate " << r.estimate
              << " (want within [0.94,1.15])";
        }
      }
    }
  }

  double sec = ms_since(t0) / 1000.0;
  if (sec > 300.0) {
    ok = false;
    log << " runtime " << sec << " s exceeds 300";
  }
  std::ostringstream detail;
  detail << "runtime " << sec << " s" << log.str();
  gate.report(8, ok, "application table reproduction", detail.str());

  EfficiencyBounds eff = efficiency_bounds(*rep.path, 1.0, 0.05, 0.8);
  std::ostringstream d9;
  d9 << "FLCI efficiency " << eff.flci;
  gate.report(9, eff.flci > 0.97, "application FLCI efficiency", d9.str());
}

void criterion_10(Gate& gate) {
  // byte-identical reports across repeated runs (library level; the CLI
  // round trip is exercised by the cli_toy ctest)
  std::string csv = "acceptance_toy.csv";
  {
    std::ofstream out(csv);
    out << "y,d,x1,x2\n";
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 14; ++i) {
      out << unif(rng) << "," << (i % 2) << "," << unif(rng) << ","
          << unif(rng) << "\n";
    }
  }
  RunConfig config;
  config.csv_path = csv;
  config.outcome = "y";
  config.treatment = "d";
  config.covariates = {"x1", "x2"};
  config.target = TargetKind::cate;
  config.nn_neighbors = 2;
  config.c_grid = {0.5, 1.0};
  json a = cmd_sensitivity(config);
  json b = cmd_sensitivity(config);
  bool ok = a.dump() == b.dump();
  json d1 = cmd_diagnostics(config);
  json d2 = cmd_diagnostics(config);
  ok = ok && d1.dump() == d2.dump();
  gate.report(10, ok, "deterministic reports");
}

}  // namespace

int main() {
  Gate gate;
  try {
    criterion_1(gate);
    criterion_2(gate);
    criterion_3(gate);
    criterion_4(gate);
    criterion_5(gate);
    criterion_6(gate);
    criterion_7(gate);
    criteria_8_9(gate);
    criterion_10(gate);
  } catch (const std::exception& e) {
    std::cout << "acceptance harness error: " << e.what() << "\n";
    return 1;
  }
  if (gate.failures == 0) {
    std::cout << "acceptance: all criteria passed (skips are conditional on "
                 "user-supplied data)\n";
    return 0;
  }
  std::cout << "acceptance: " << gate.failures << " criterion(s) failed\n";
  return 1;
}
