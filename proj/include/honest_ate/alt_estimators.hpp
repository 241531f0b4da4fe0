#ifndef HONEST_ATE_ALT_ESTIMATORS_HPP
#define HONEST_ATE_ALT_ESTIMATORS_HPP

#include <Eigen/Dense>
#include <vector>

#include "honest_ate/estimator.hpp"
#include "honest_ate/geometry.hpp"

namespace honest_ate {

/// Tie handling for nearest-neighbor match lists. lowest_index picks the
/// tied candidate with the smallest sample row; average splits the final
/// slot's weight equally over all candidates tied at the cut distance (match
/// counts then become fractional).
enum class TiePolicy { lowest_index, average };

/// Match bookkeeping: K(i) counts (possibly fractionally, under the average
/// tie policy) how often unit i serves as a match; match_lists holds the
/// selected opposite-arm sample rows per matched unit.
struct MatchCounts {
  int M = 1;
  Eigen::VectorXd K;  // length n, sample order
  std::vector<std::vector<Eigen::Index>> match_lists;  // length n
};

/// Count matches for the M-nearest-opposite-arm scheme. For CATE every unit
/// is matched; for CATT only treated units are.
MatchCounts match_counts(const Sample& sample, const DistanceMatrices& distances,
                         int M, const TargetWeights& target,
                         TiePolicy ties = TiePolicy::lowest_index);

/// Matching-estimator weights. CATE: k_i = (2 d_i - 1)(1 + K(i)/M)/n.
/// CATT: treated keep 1/n1 and control j gets -K(j)/(M n1).
LinearEstimate matching_weights(const Sample& sample,
                                const DistanceMatrices& distances, int M,
                                const TargetWeights& target,
                                TiePolicy ties = TiePolicy::lowest_index);

/// k_i = d_i/n1 - (1-d_i)/n0.
LinearEstimate difference_in_means(const Sample& sample);

/// Worst-case bias of an arbitrary linear estimator over the Lipschitz class
/// (with optional monotone directions). Requires the weight normalization
/// sum_treated k = 1, sum_control k = -1 to 1e-8; otherwise the bias is
/// unbounded. Solved exactly through the transportation dual of the
/// constraint LP, one problem per arm.
double worst_case_bias_lp(const Eigen::VectorXd& weights, const Sample& sample,
                          const LipschitzSpec& lipschitz,
                          const TargetWeights& target);

struct MatchingProfileRow {
  int M = 1;
  LinearEstimate estimate;  // weights, worst-case bias and working sd
};

/// Weights, LP worst-case bias and working sd for every M in [m_min, m_max].
/// The expensive bias computation is shared by all criteria.
std::vector<MatchingProfileRow> matching_profile(
    const Sample& sample, const DistanceMatrices& distances, int m_min,
    int m_max, const VarianceSpec& variances, const LipschitzSpec& lipschitz,
    const TargetWeights& target, TiePolicy ties = TiePolicy::lowest_index);

struct MatchingTuneResult {
  int m_star = 1;
  LinearEstimate estimate;
};

/// Pick the M minimizing the criterion over a precomputed profile; the
/// smallest M wins ties.
MatchingTuneResult tune_matching(const std::vector<MatchingProfileRow>& profile,
                                 Criterion criterion, double alpha, double beta);

/// Convenience overload building the profile internally.
MatchingTuneResult tune_matching(const Sample& sample,
                                 const DistanceMatrices& distances, int m_min,
                                 int m_max, Criterion criterion,
                                 const VarianceSpec& variances,
                                 const LipschitzSpec& lipschitz,
                                 const TargetWeights& target, double alpha,
                                 double beta,
                                 TiePolicy ties = TiePolicy::lowest_index);

}  // namespace honest_ate

#endif  // HONEST_ATE_ALT_ESTIMATORS_HPP
