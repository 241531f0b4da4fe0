#ifndef HONEST_ATE_SOLUTION_PATH_HPP
#define HONEST_ATE_SOLUTION_PATH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "honest_ate/data.hpp"
#include "honest_ate/geometry.hpp"

namespace honest_ate {

/// One multiplier entry. (i, j) are local arm indices: i indexes treated
/// units, j indexes control units. Family 0 entries multiply the constraints
/// on control-arm values (r_treated <= m_control + D0); family 1 entries
/// multiply the constraints on treated-arm values (r_control <= m_treated +
/// D1). An entry may be active with a zero multiplier.
struct MultiplierEntry {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

/// Snapshot of the homotopy at a single mu. The problem is kept in unit
/// Lipschitz scale: m_i = (2 d_i - 1) f(x_i, d_i) and
/// r_i = (1 - 2 d_i) f(x_i, 1 - d_i), both stored in sample order.
struct PathState {
  double mu = 0.0;
  Eigen::VectorXd m;  // length n, sample order
  Eigen::VectorXd r;  // length n, sample order
  std::vector<MultiplierEntry> lam0;  // active family-0 entries
  std::vector<MultiplierEntry> lam1;  // active family-1 entries
  std::vector<Eigen::Index> treated_rows;
  std::vector<Eigen::Index> control_rows;

  /// Effective distances D0 + m_control, D1 + m_treated at this state.
  Eigen::MatrixXd effective_d0(const DistanceMatrices& dist) const;
  Eigen::MatrixXd effective_d1(const DistanceMatrices& dist) const;
};

/// Matched clusters of the two active bipartite graphs. For family 0 the
/// clusters m0[k] are control units and r0[k] the treated units linked to
/// them; for family 1 the clusters m1[k] are treated units and r1[k] the
/// linked controls. Indices are local arm indices.
struct ClusterPartition {
  std::vector<std::vector<int>> m0, r0;
  std::vector<std::vector<int>> m1, r1;
};

/// Piecewise-linear directions valid on one segment.
struct PathDirections {
  Eigen::VectorXd dm;  // length n, sample order
  Eigen::VectorXd dr;  // length n, sample order
  std::vector<MultiplierEntry> dlam0;  // aligned with the active sets
  std::vector<MultiplierEntry> dlam1;
};

enum class PathEventKind : std::uint8_t {
  activate0, activate1, deactivate0, deactivate1
};

struct PathEvent {
  PathEventKind kind;
  int i;  // treated local index
  int j;  // control local index
};

struct StepResult {
  double step = std::numeric_limits<double>::infinity();
  std::vector<PathEvent> events;  // all events firing at this step
};

/// Scalar summaries of a knot sufficient to evaluate every criterion on the
/// following segment without materializing the state. With s = mu - knot mu:
///   sum m^2/sigma^2        = qa + 2 qb s + qc s^2
///   sum w (m + r)          = lw + lwd s          (omega / 2C)
///   sum_treated m/sigma^2  = nm + dnm s          (normalizer; equals mu)
struct KnotSummary {
  double mu = 0.0;
  double qa = 0.0, qb = 0.0, qc = 0.0;
  double lw = 0.0, lwd = 0.0;
  double nm = 0.0, dnm = 0.0;
};

struct PathOptions {
  double mu_max = std::numeric_limits<double>::infinity();
  int max_knots_factor = 50;     // hard cap: factor * n knots
  int checkpoint_stride = 0;     // 0: automatic from problem size
  bool validate_knots = true;    // KKT checks while tracing
};

/// The traced solution path. Knot states are reconstructed on demand by
/// replaying the recorded events from the nearest checkpoint; all scalar
/// queries (delta, omega, bias, sd) come from the knot summaries directly.
/// Immutable after tracing; safe to query concurrently.
class SolutionPath {
 public:
  SolutionPath();
  ~SolutionPath();
  SolutionPath(const SolutionPath&);
  SolutionPath(SolutionPath&&) noexcept;
  SolutionPath& operator=(const SolutionPath&);
  SolutionPath& operator=(SolutionPath&&) noexcept;

  const std::vector<KnotSummary>& knots() const { return knots_; }
  const std::vector<std::vector<PathEvent>>& events() const { return events_; }
  bool reached_terminal() const { return reached_terminal_; }
  double mu_last() const { return knots_.back().mu; }

  double w0() const { return w0_; }
  double w1() const { return w1_; }
  double sigma2_0() const { return s20_; }
  double sigma2_1() const { return s21_; }
  Eigen::Index n0() const { return dist_.d0.cols(); }
  Eigen::Index n1() const { return dist_.d0.rows(); }
  Eigen::Index n() const { return n0() + n1(); }
  const DistanceMatrices& distances() const { return dist_; }
  const TargetWeights& target() const { return target_; }

  /// Index of the segment containing mu (last segment for mu beyond the
  /// final knot).
  std::size_t segment_index(double mu) const;

  /// Summary scalars evaluated at an arbitrary mu >= 0.
  KnotSummary summary_at(double mu) const;

  /// Full state at an arbitrary mu >= 0 (replayed from a checkpoint).
  PathState state_at(double mu) const;

  /// Directions of the segment containing mu.
  PathDirections directions_at(double mu) const;

  /// Rebuild a path from archived pieces (serialization support). Replay
  /// checkpoints are reconstructed from the event log.
  static SolutionPath from_archive(DistanceMatrices dist, TargetWeights target,
                                   double w0, double w1, double s20,
                                   double s21, std::vector<KnotSummary> knots,
                                   std::vector<std::vector<PathEvent>> events,
                                   bool reached_terminal);

  struct Checkpoint;  // replay snapshot; defined with the implementation

 private:
  friend SolutionPath trace_path(const Sample& sample,
                                 const LipschitzSpec& lipschitz,
                                 const TargetWeights& target,
                                 const VarianceSpec& arm_variances,
                                 const PathOptions& options);
  DistanceMatrices dist_;
  TargetWeights target_;
  double w0_ = 0.0, w1_ = 0.0;
  double s20_ = 1.0, s21_ = 1.0;
  std::vector<KnotSummary> knots_;
  std::vector<std::vector<PathEvent>> events_;  // events applied AT knot k
  std::vector<Checkpoint> checkpoints_;
  bool reached_terminal_ = false;
};

/// Residuals of the homotopy KKT system at one state, all in unit Lipschitz
/// scale. stationarity covers the four first-order-condition families;
/// primal covers the cross-arm constraints (and same-arm ones when
/// exhaustive); slackness is complementary slackness on the active sets.
struct KktReport {
  double stationarity = 0.0;
  double primal = 0.0;
  double slackness = 0.0;
  double dual = 0.0;  // most negative multiplier, as a magnitude

  double worst(double mu) const;
  bool ok(double mu, double tol_scale = 1e-8) const;
};

/// Initial state at mu = 0: m = 0, multipliers zero, r at the nearest
/// opposite-arm distances with all minimizers marked active.
/// Throws NotArmLevelError unless target weights and variances are
/// arm-level.
PathState init_path(const DistanceMatrices& distances, const Sample& sample,
                    const TargetWeights& target,
                    const VarianceSpec& arm_variances);

/// Connected components of the active bipartite graphs.
ClusterPartition clusters(const PathState& state, Eigen::Index n0,
                          Eigen::Index n1);

/// Piecewise-linear directions for the segment starting at `state`.
PathDirections directions(const PathState& state,
                          const ClusterPartition& partition,
                          const Sample& sample, const TargetWeights& target,
                          const VarianceSpec& arm_variances);

/// Smallest step at which an inactive constraint activates or an active
/// multiplier vanishes; infinite on the terminal segment.
StepResult step_size(const PathState& state, const PathDirections& dirs,
                     const DistanceMatrices& distances);

/// Trace the whole path. The path is computed in unit Lipschitz scale: the
/// Lipschitz constant only rescales the delta(mu) map, so one path serves
/// every C. Monotone constraints are not supported here.
SolutionPath trace_path(const Sample& sample, const LipschitzSpec& lipschitz,
                        const TargetWeights& target,
                        const VarianceSpec& arm_variances,
                        const PathOptions& options = {});

/// KKT residual report for a state of the given path. When `all_pairs` (the
/// full n-by-n covariate distance matrix) is supplied, the same-arm
/// constraint families are checked as well; the cross-arm families are
/// always checked.
KktReport kkt_report(const SolutionPath& path, const PathState& state,
                     const Eigen::MatrixXd* all_pairs = nullptr);

}  // namespace honest_ate

#endif  // HONEST_ATE_SOLUTION_PATH_HPP
