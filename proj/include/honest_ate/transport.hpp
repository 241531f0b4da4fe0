#ifndef HONEST_ATE_TRANSPORT_HPP
#define HONEST_ATE_TRANSPORT_HPP

#include <Eigen/Dense>
#include <vector>

namespace honest_ate {

struct TransportResult {
  double cost = 0.0;
  // Largest violation of the dual optimality conditions, for certification.
  double dual_violation = 0.0;
  int augmentations = 0;
};

/// Balanced transportation problem: ship `supply` from the row nodes to
/// meet `demand` at the column nodes at minimum total cost. Costs must be
/// nonnegative. Supplies and demands must balance to within 1e-9 of their
/// scale; the demand side is rescaled to match exactly.
///
/// Successive shortest augmenting paths with node potentials; exact for a
/// transportation polytope up to floating-point roundoff, with the final
/// duality gap reported in `dual_violation`.
TransportResult min_cost_transport(const std::vector<double>& supply,
                                   const std::vector<double>& demand,
                                   const Eigen::MatrixXd& cost);

}  // namespace honest_ate

#endif  // HONEST_ATE_TRANSPORT_HPP
