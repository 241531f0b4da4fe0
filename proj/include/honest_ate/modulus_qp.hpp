#ifndef HONEST_ATE_MODULUS_QP_HPP
#define HONEST_ATE_MODULUS_QP_HPP

#include <Eigen/Dense>

#include "honest_ate/data.hpp"

namespace honest_ate {

struct ModulusSolution {
  /// Function values (f(x_1,0), ..., f(x_n,0), f(x_1,1), ..., f(x_n,1)).
  Eigen::VectorXd f;
  double objective = 0.0;     // 2 sum_i w_i (f(x_i,1) - f(x_i,0))
  double kkt_residual = 0.0;  // stationarity residual at the returned point
  double gap_bound = 0.0;     // certified bound on the suboptimality
};

/// Direct solver for the modulus program: maximize 2 sum_i w_i (f(x_i,1) -
/// f(x_i,0)) subject to sum_i f(x_i,d_i)^2 / sigma^2_i <= delta^2/4 and the
/// full set of within-arm Lipschitz constraints over all covariate points.
///
/// A feasible-start log-barrier method on the merged coordinate system
/// (exact covariate duplicates share one value per arm). Dense; intended for
/// small designs as the independent check of the solution path, and it is
/// the only route supporting genuinely per-observation variances.
ModulusSolution solve_modulus_qp(const Sample& sample,
                                 const LipschitzSpec& lipschitz,
                                 const TargetWeights& target,
                                 const VarianceSpec& variances, double delta);

}  // namespace honest_ate

#endif  // HONEST_ATE_MODULUS_QP_HPP
