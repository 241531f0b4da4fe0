#include "honest_ate/alt_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "honest_ate/errors.hpp"
#include "honest_ate/transport.hpp"

namespace honest_ate {

namespace {

// M nearest opposite-arm units for one local row of the cross-distance
// matrix. Returns (index, weight) pairs into the opposite arm's local
// indexing; weights sum to M.
std::vector<std::pair<int, double>> nearest_list(
    const Eigen::VectorXd& dist_row, int M, TiePolicy ties) {
  const int len = static_cast<int>(dist_row.size());
  std::vector<int> order(len);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist_row(a) != dist_row(b)) return dist_row(a) < dist_row(b);
    return a < b;
  });
  std::vector<std::pair<int, double>> out;
  if (ties == TiePolicy::lowest_index) {
    for (int k = 0; k < M; ++k) out.emplace_back(order[k], 1.0);
    return out;
  }
  // average: everything strictly inside the cut is kept whole; candidates
  // tied at the cut distance share the remaining slots equally.
  double cut = dist_row(order[M - 1]);
  const double tol = 1e-12 * (1.0 + std::abs(cut));
  int n_inside = 0;
  while (n_inside < M && dist_row(order[n_inside]) < cut - tol) ++n_inside;
  int n_tied = 0;
  for (int k = n_inside; k < len && dist_row(order[k]) <= cut + tol; ++k) {
    ++n_tied;
  }
  for (int k = 0; k < n_inside; ++k) out.emplace_back(order[k], 1.0);
  double share = static_cast<double>(M - n_inside) / n_tied;
  for (int k = n_inside; k < n_inside + n_tied; ++k) {
    out.emplace_back(order[k], share);
  }
  return out;
}

}  // namespace

MatchCounts match_counts(const Sample& sample, const DistanceMatrices& distances,
                         int M, const TargetWeights& target, TiePolicy ties) {
  const Eigen::Index n = sample.n();
  const int n0 = static_cast<int>(distances.control_rows.size());
  const int n1 = static_cast<int>(distances.treated_rows.size());
  const bool match_controls_too = target.kind != TargetKind::catt;
  if (M < 1) throw ConfigError("number of matches must be at least one");
  if (M > n0 || (match_controls_too && M > n1)) {
    throw TooFewOppositeError("M exceeds the size of an opposite arm");
  }

  MatchCounts out;
  out.M = M;
  out.K = Eigen::VectorXd::Zero(n);
  out.match_lists.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n1; ++i) {
    auto lst = nearest_list(distances.d0.row(i), M, ties);
    auto& rows = out.match_lists[distances.treated_rows[i]];
    for (auto [j, wgt] : lst) {
      out.K(distances.control_rows[j]) += wgt;
      rows.push_back(distances.control_rows[j]);
    }
  }
  if (match_controls_too) {
    for (int j = 0; j < n0; ++j) {
      auto lst = nearest_list(distances.d1.col(j), M, ties);
      auto& rows = out.match_lists[distances.control_rows[j]];
      for (auto [i, wgt] : lst) {
        out.K(distances.treated_rows[i]) += wgt;
        rows.push_back(distances.treated_rows[i]);
      }
    }
  }
  return out;
}

LinearEstimate matching_weights(const Sample& sample,
                                const DistanceMatrices& distances, int M,
                                const TargetWeights& target, TiePolicy ties) {
  if (target.kind == TargetKind::custom) {
    throw ConfigError("matching weights are defined for CATE and CATT targets");
  }
  MatchCounts counts = match_counts(sample, distances, M, target, ties);
  const Eigen::Index n = sample.n();
  const double n1 = static_cast<double>(sample.n_treated());

  LinearEstimate est;
  est.weights.resize(n);
  for (Eigen::Index u = 0; u < n; ++u) {
    double d = sample.treatments(u);
    if (target.kind == TargetKind::cate) {
      est.weights(u) =
          (2.0 * d - 1.0) * (1.0 + counts.K(u) / M) / static_cast<double>(n);
    } else {
      est.weights(u) = d == 1.0 ? 1.0 / n1 : -counts.K(u) / (M * n1);
    }
  }
  est.provenance = "matching M=" + std::to_string(M) +
                   (ties == TiePolicy::lowest_index ? ", ties=lowest"
                                                    : ", ties=average");
  if (sample.outcomes) est.estimate = est.weights.dot(*sample.outcomes);
  return est;
}

LinearEstimate difference_in_means(const Sample& sample) {
  validate_sample(sample);
  const double n1 = static_cast<double>(sample.n_treated());
  const double n0 = static_cast<double>(sample.n_control());
  LinearEstimate est;
  est.weights.resize(sample.n());
  for (Eigen::Index u = 0; u < sample.n(); ++u) {
    est.weights(u) = sample.treatments(u) == 1 ? 1.0 / n1 : -1.0 / n0;
  }
  est.provenance = "difference-in-means";
  if (sample.outcomes) est.estimate = est.weights.dot(*sample.outcomes);
  return est;
}

double worst_case_bias_lp(const Eigen::VectorXd& weights, const Sample& sample,
                          const LipschitzSpec& lipschitz,
                          const TargetWeights& target) {
  const Eigen::Index n = sample.n();
  if (weights.size() != n) {
    throw LengthMismatchError("weight vector length does not match n");
  }
  double sum_tr = 0.0, sum_ct = 0.0;
  for (Eigen::Index u = 0; u < n; ++u) {
    (sample.treatments(u) == 1 ? sum_tr : sum_ct) += weights(u);
  }
  if (std::abs(sum_tr - 1.0) > 1e-8 || std::abs(sum_ct + 1.0) > 1e-8) {
    throw UnboundedBiasError(
        "weights violate the normalization (treated sum 1, control sum -1); "
        "the worst-case bias is infinite");
  }
  if (!lipschitz.monotone_indices.empty() &&
      !lipschitz.norm.is_diagonal(1e-14)) {
    throw ConfigError(
        "monotone constraints require a diagonal norm weight matrix");
  }

  // Per-arm objective coefficients. Arm 1 collects k on treated minus the
  // target weights; arm 0 collects k on controls plus the target weights.
  // Each arm's subproblem is max sum_u c_u g_u over g with g_u - g_v <=
  // cost(u,v); its LP dual ships the positive part of c to the negative part
  // at minimal cost, which the triangle inequality makes a plain
  // transportation problem.
  Eigen::MatrixXd cost =
      lipschitz.monotone_indices.empty()
          ? pairwise_distances(sample, lipschitz.norm)
          : pairwise_monotone_deviations(sample, lipschitz.norm,
                                         lipschitz.monotone_indices);
  cost *= lipschitz.constant;

  double total = 0.0;
  for (int arm = 0; arm < 2; ++arm) {
    Eigen::VectorXd c(n);
    for (Eigen::Index u = 0; u < n; ++u) {
      double k_here = (sample.treatments(u) == arm) ? weights(u) : 0.0;
      c(u) = arm == 1 ? k_here - target.weights(u) : k_here + target.weights(u);
    }
    std::vector<int> src, snk;
    std::vector<double> supply, demand;
    const double tol_mass = 1e-13 * (1.0 + c.cwiseAbs().maxCoeff());
    for (Eigen::Index u = 0; u < n; ++u) {
      if (c(u) > tol_mass) {
        src.push_back(static_cast<int>(u));
        supply.push_back(c(u));
      } else if (c(u) < -tol_mass) {
        snk.push_back(static_cast<int>(u));
        demand.push_back(-c(u));
      }
    }
    if (src.empty() || snk.empty()) continue;
    double s_tot = std::accumulate(supply.begin(), supply.end(), 0.0);
    double d_tot = std::accumulate(demand.begin(), demand.end(), 0.0);
    if (std::abs(s_tot - d_tot) > 1e-8 * (1.0 + s_tot)) {
      throw UnboundedBiasError("arm coefficient masses fail to balance");
    }
    Eigen::MatrixXd sub(src.size(), snk.size());
    for (std::size_t a = 0; a < src.size(); ++a) {
      for (std::size_t b = 0; b < snk.size(); ++b) {
        sub(a, b) = cost(src[a], snk[b]);
      }
    }
    TransportResult tr = min_cost_transport(supply, demand, sub);
    if (tr.dual_violation > 1e-7 * (1.0 + sub.maxCoeff())) {
      throw SolverStallError("transportation dual certificate too loose: " +
                             std::to_string(tr.dual_violation));
    }
    total += tr.cost;
  }
  return total;
}

std::vector<MatchingProfileRow> matching_profile(
    const Sample& sample, const DistanceMatrices& distances, int m_min,
    int m_max, const VarianceSpec& variances, const LipschitzSpec& lipschitz,
    const TargetWeights& target, TiePolicy ties) {
  if (m_min < 1 || m_max < m_min) {
    throw ConfigError("invalid matching range");
  }
  Eigen::VectorXd sigma2 = variances.expand(sample);
  std::vector<MatchingProfileRow> rows;
  rows.reserve(static_cast<std::size_t>(m_max - m_min + 1));
  for (int M = m_min; M <= m_max; ++M) {
    MatchingProfileRow row;
    row.M = M;
    row.estimate = matching_weights(sample, distances, M, target, ties);
    row.estimate.maxbias =
        worst_case_bias_lp(row.estimate.weights, sample, lipschitz, target);
    row.estimate.sd = std::sqrt(
        row.estimate.weights.array().square().matrix().dot(sigma2));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatchingTuneResult tune_matching(const std::vector<MatchingProfileRow>& profile,
                                 Criterion criterion, double alpha,
                                 double beta) {
  if (profile.empty()) throw ConfigError("empty matching profile");
  MatchingTuneResult out;
  double best = std::numeric_limits<double>::infinity();
  for (const MatchingProfileRow& row : profile) {
    double val = criterion_value(*row.estimate.maxbias, *row.estimate.sd,
                                 criterion, alpha, beta);
    if (val < best * (1.0 - 1e-12)) {
      best = val;
      out.m_star = row.M;
      out.estimate = row.estimate;
    }
  }
  return out;
}

MatchingTuneResult tune_matching(const Sample& sample,
                                 const DistanceMatrices& distances, int m_min,
                                 int m_max, Criterion criterion,
                                 const VarianceSpec& variances,
                                 const LipschitzSpec& lipschitz,
                                 const TargetWeights& target, double alpha,
                                 double beta, TiePolicy ties) {
  return tune_matching(matching_profile(sample, distances, m_min, m_max,
                                        variances, lipschitz, target, ties),
                       criterion, alpha, beta);
}

}  // namespace honest_ate
