#include "honest_ate/modulus_qp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "honest_ate/errors.hpp"
#include "honest_ate/geometry.hpp"

namespace honest_ate {

namespace {

struct Pair {
  int a;
  int b;
  double bound;
};

}  // namespace

ModulusSolution solve_modulus_qp(const Sample& sample,
                                 const LipschitzSpec& lipschitz,
                                 const TargetWeights& target,
                                 const VarianceSpec& variances, double delta) {
  validate_sample(sample);
  variances.validate(sample);
  if (!lipschitz.monotone_indices.empty()) {
    throw ConfigError("modulus solver covers the plain Lipschitz class only");
  }
  if (delta < 0.0) throw NumericalError("delta must be nonnegative");

  const int n = static_cast<int>(sample.n());
  const double cc = lipschitz.constant;
  ModulusSolution sol;
  sol.f = Eigen::VectorXd::Zero(2 * n);
  if (delta == 0.0) return sol;

  Eigen::MatrixXd dist = pairwise_distances(sample, lipschitz.norm);
  Eigen::VectorXd sigma2 = variances.expand(sample);

  // Merge coordinates forced equal: same arm, C * distance == 0. Raw
  // coordinate u in [0, 2n): u = d*n + i.
  std::vector<int> parent(2 * n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  const double merge_tol = 1e-12;
  for (int d = 0; d < 2; ++d) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (cc * dist(i, j) <= merge_tol) {
          int ra = find(d * n + i), rb = find(d * n + j);
          if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
      }
    }
  }
  std::vector<int> rep_of(2 * n, -1);
  std::vector<int> reps;
  for (int u = 0; u < 2 * n; ++u) {
    int r = find(u);
    if (rep_of[r] < 0) {
      rep_of[r] = static_cast<int>(reps.size());
      reps.push_back(r);
    }
    rep_of[u] = rep_of[r];
  }
  const int q = static_cast<int>(reps.size());

  // Objective gradient and diagonal quadratic in merged coordinates.
  Eigen::VectorXd c = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd qdiag = Eigen::VectorXd::Zero(q);
  for (int i = 0; i < n; ++i) {
    c(rep_of[n + i]) += 2.0 * target.weights(i);
    c(rep_of[i]) -= 2.0 * target.weights(i);
    int obs = sample.treatments(i) == 1 ? n + i : i;
    qdiag(rep_of[obs]) += 1.0 / sigma2(i);
  }

  // Within-arm Lipschitz constraints between distinct representatives.
  // One constraint per ordered pair of group roots within each arm.
  std::vector<Pair> cons;
  for (int d = 0; d < 2; ++d) {
    for (int i = 0; i < n; ++i) {
      if (find(d * n + i) != d * n + i) continue;
      for (int j = 0; j < n; ++j) {
        if (j == i || find(d * n + j) != d * n + j) continue;
        cons.push_back({rep_of[d * n + i], rep_of[d * n + j], cc * dist(i, j)});
      }
    }
  }
  const int m = static_cast<int>(cons.size());
  const double s_quad_total = delta * delta / 4.0;

  Eigen::VectorXd f = Eigen::VectorXd::Zero(q);
  auto slack_quad = [&](const Eigen::VectorXd& x) {
    return s_quad_total - x.cwiseProduct(qdiag).dot(x);
  };

  double t = 1.0;
  const double mu_factor = 20.0;
  const double target_gap = 1e-11 * std::max(1.0, delta);
  const int max_outer = 60;

  Eigen::VectorXd grad(q), dx(q);
  Eigen::MatrixXd hess(q, q);
  std::vector<double> slacks(m);

  for (int outer = 0; outer < max_outer; ++outer) {
    // Newton on the barrier objective at this t.
    for (int it = 0; it < 200; ++it) {
      for (int k = 0; k < m; ++k) {
        slacks[k] = cons[k].bound - (f(cons[k].a) - f(cons[k].b));
        if (slacks[k] <= 0.0) throw SolverStallError("barrier left the interior");
      }
      double sq = slack_quad(f);
      if (sq <= 0.0) throw SolverStallError("barrier left the quadratic interior");

      grad = -t * c;
      hess.setZero();
      for (int k = 0; k < m; ++k) {
        double inv = 1.0 / slacks[k];
        double inv2 = inv * inv;
        grad(cons[k].a) += inv;
        grad(cons[k].b) -= inv;
        hess(cons[k].a, cons[k].a) += inv2;
        hess(cons[k].b, cons[k].b) += inv2;
        hess(cons[k].a, cons[k].b) -= inv2;
        hess(cons[k].b, cons[k].a) -= inv2;
      }
      Eigen::VectorXd qf = qdiag.cwiseProduct(f);
      grad += 2.0 / sq * qf;
      hess.diagonal() += (2.0 / sq) * qdiag;
      hess += (4.0 / (sq * sq)) * (qf * qf.transpose());

      Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
      dx = ldlt.solve(-grad);
      if (!dx.allFinite()) {
        hess.diagonal().array() += 1e-10 * (1.0 + hess.diagonal().maxCoeff());
        dx = hess.ldlt().solve(-grad);
        if (!dx.allFinite()) throw SolverStallError("singular barrier Hessian");
      }
      double decrement = -grad.dot(dx);
      if (decrement < 2e-13) break;

      // Step to a fraction of the boundary, then backtrack on the value.
      double step = 1.0;
      for (int k = 0; k < m; ++k) {
        double delta_k = dx(cons[k].a) - dx(cons[k].b);
        if (delta_k > 0.0) step = std::min(step, 0.99 * slacks[k] / delta_k);
      }
      {
        // largest step keeping the quadratic slack positive
        double aa = dx.cwiseProduct(qdiag).dot(dx);
        double bb = 2.0 * f.cwiseProduct(qdiag).dot(dx);
        double ccq = -sq;
        if (aa > 0.0) {
          double disc = bb * bb - 4.0 * aa * ccq;
          double root = (-bb + std::sqrt(std::max(disc, 0.0))) / (2.0 * aa);
          if (root > 0.0) step = std::min(step, 0.99 * root);
        }
      }
      auto value = [&](const Eigen::VectorXd& x) {
        double v = -t * c.dot(x);
        for (int k = 0; k < m; ++k) {
          double s = cons[k].bound - (x(cons[k].a) - x(cons[k].b));
          if (s <= 0.0) return std::numeric_limits<double>::infinity();
          v -= std::log(s);
        }
        double sqv = slack_quad(x);
        if (sqv <= 0.0) return std::numeric_limits<double>::infinity();
        return v - std::log(sqv);
      };
      double v0 = value(f);
      int backtracks = 0;
      while (backtracks < 60) {
        Eigen::VectorXd trial = f + step * dx;
        if (value(trial) <= v0 - 1e-4 * step * decrement) {
          f = trial;
          break;
        }
        step *= 0.5;
        ++backtracks;
      }
      if (backtracks >= 60) break;  // no further progress at this t
    }
    sol.gap_bound = static_cast<double>(m + 1) / t;
    if (sol.gap_bound <= target_gap || t > 1e14) break;
    t *= mu_factor;
  }

  // Dual certificate from the barrier multipliers.
  Eigen::VectorXd station = -c;
  for (int k = 0; k < m; ++k) {
    double s = cons[k].bound - (f(cons[k].a) - f(cons[k].b));
    double lam = 1.0 / (t * s);
    station(cons[k].a) += lam;
    station(cons[k].b) -= lam;
  }
  double sq = slack_quad(f);
  station += (2.0 / (t * sq)) * qdiag.cwiseProduct(f);
  sol.kkt_residual = station.lpNorm<Eigen::Infinity>();

  for (int i = 0; i < n; ++i) {
    sol.f(i) = f(rep_of[i]);
    sol.f(n + i) = f(rep_of[n + i]);
  }
  sol.objective = c.dot(f);
  return sol;
}

}  // namespace honest_ate
