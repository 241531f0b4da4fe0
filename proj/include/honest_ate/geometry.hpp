#ifndef HONEST_ATE_GEOMETRY_HPP
#define HONEST_ATE_GEOMETRY_HPP

#include <Eigen/Dense>
#include <vector>

#include "honest_ate/data.hpp"

namespace honest_ate {

/// Cross-arm distance matrices. D0 and D1 both start out as the raw
/// treated-by-control distances; the homotopy works with versions offset by
/// the current solution ("effective distances"), so the two copies are kept
/// separate. treated_rows/control_rows map local arm indices back to sample
/// rows.
struct DistanceMatrices {
  Eigen::MatrixXd d0;  // n1 x n0
  Eigen::MatrixXd d1;  // n1 x n0
  std::vector<Eigen::Index> treated_rows;  // local treated i -> sample row
  std::vector<Eigen::Index> control_rows;  // local control j -> sample row
};

/// Evaluate ||v||_{A,p}. Throws DimensionMismatchError when sizes disagree.
double norm_eval(const Eigen::VectorXd& v, const NormSpec& norm);

/// ||(v)_{S+}||_{A,p}: coordinates in the monotone set are clipped at zero
/// before evaluating the norm. With an empty set this is norm_eval.
double monotone_deviation(const Eigen::VectorXd& v, const NormSpec& norm,
                          const std::vector<int>& monotone_indices);

/// Dense treated-by-control distance matrices under the given norm.
DistanceMatrices cross_distances(const Sample& sample, const NormSpec& norm);

/// All-pairs distance matrix over the full sample (used by the bias LP,
/// whose Lipschitz constraints run over every covariate point).
Eigen::MatrixXd pairwise_distances(const Sample& sample, const NormSpec& norm);

/// Directed all-pairs matrix with entry (u,v) = ||(x_u - x_v)_{S+}||_{A,p}.
Eigen::MatrixXd pairwise_monotone_deviations(const Sample& sample,
                                             const NormSpec& norm,
                                             const std::vector<int>& monotone_indices);

}  // namespace honest_ate

#endif  // HONEST_ATE_GEOMETRY_HPP
