#include "honest_ate/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "honest_ate/errors.hpp"

namespace honest_ate {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// Successive shortest augmenting paths with Johnson potentials. Node
// potentials keep every residual reduced cost nonnegative, so each search is
// a plain Dijkstra over the bipartite residual graph (dense forward arcs,
// backward arcs only on the flow support).
TransportResult min_cost_transport(const std::vector<double>& supply,
                                   const std::vector<double>& demand,
                                   const Eigen::MatrixXd& cost) {
  const int ns = static_cast<int>(supply.size());
  const int nt = static_cast<int>(demand.size());
  TransportResult result;
  if (ns == 0 || nt == 0) {
    double mass = 0.0;
    for (double v : supply) mass += v;
    for (double v : demand) mass += v;
    if (mass > 1e-12) {
      throw NumericalError("transport: mass with no counterpart side");
    }
    return result;
  }
  if (cost.rows() != ns || cost.cols() != nt) {
    throw DimensionMismatchError("transport: cost matrix shape mismatch");
  }

  double total_supply = std::accumulate(supply.begin(), supply.end(), 0.0);
  double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
  double scale = std::max({1.0, total_supply, total_demand});
  if (std::abs(total_supply - total_demand) > 1e-9 * scale) {
    throw NumericalError("transport: supplies and demands do not balance");
  }

  std::vector<double> rem_supply = supply;
  std::vector<double> rem_demand = demand;
  if (total_demand > 0.0) {
    double f = total_supply / total_demand;
    for (double& b : rem_demand) b *= f;
  }

  // Flow support: per source, (sink, amount); plus a per-sink view of the
  // sources currently shipping into it.
  std::vector<std::vector<std::pair<int, double>>> flow(ns);
  std::vector<std::vector<int>> into_sink(nt);

  auto flow_entry = [&](int s, int t) {
    return std::find_if(flow[s].begin(), flow[s].end(),
                        [t](const auto& e) { return e.first == t; });
  };
  auto add_flow = [&](int s, int t, double amt) {
    auto it = flow_entry(s, t);
    if (it == flow[s].end()) {
      flow[s].emplace_back(t, amt);
      into_sink[t].push_back(s);
    } else {
      it->second += amt;
    }
  };
  auto remove_flow = [&](int s, int t, double amt, double eps) {
    auto it = flow_entry(s, t);
    it->second -= amt;
    if (it->second <= eps) {
      flow[s].erase(it);
      auto& col = into_sink[t];
      col.erase(std::find(col.begin(), col.end(), s));
    }
  };

  // Reduced cost of the forward arc s->t.
  std::vector<double> pot_s(ns, 0.0), pot_t(nt, 0.0);
  auto reduced = [&](int s, int t) { return cost(s, t) - pot_s[s] + pot_t[t]; };

  std::vector<double> dist_s(ns), dist_t(nt);
  std::vector<int> pred_t(nt), pred_s(ns);
  std::vector<char> done_s(ns), done_t(nt);

  const double eps_mass = 1e-14 * scale;
  const long max_rounds = 100L * (ns + nt) + 10000;

  while (true) {
    // Terminate on relative dust: subtractive cancellation leaves the two
    // sides with slightly different residues.
    double left = 0.0;
    for (int s = 0; s < ns; ++s) left += rem_supply[s];
    if (left <= 1e-11 * scale) break;
    bool any_source = false;
    for (int s = 0; s < ns; ++s) {
      done_s[s] = 0;
      pred_s[s] = -1;
      dist_s[s] = rem_supply[s] > eps_mass ? 0.0 : kInf;
      any_source = any_source || rem_supply[s] > eps_mass;
    }
    if (!any_source) break;
    if (result.augmentations > max_rounds) {
      throw SolverStallError("transport: augmentation cap exceeded");
    }
    std::fill(dist_t.begin(), dist_t.end(), kInf);
    std::fill(done_t.begin(), done_t.end(), 0);
    std::fill(pred_t.begin(), pred_t.end(), -1);

    int best_sink = -1;
    while (true) {
      double best = kInf;
      int node = -1;
      bool node_is_sink = false;
      for (int s = 0; s < ns; ++s) {
        if (!done_s[s] && dist_s[s] < best) { best = dist_s[s]; node = s; node_is_sink = false; }
      }
      for (int t = 0; t < nt; ++t) {
        if (!done_t[t] && dist_t[t] < best) { best = dist_t[t]; node = t; node_is_sink = true; }
      }
      if (node < 0) break;
      if (node_is_sink) {
        const int t = node;
        done_t[t] = 1;
        if (rem_demand[t] > eps_mass) { best_sink = t; break; }
        // Backward arcs t -> s along existing flow; zero reduced cost on the
        // support up to roundoff.
        for (int s : into_sink[t]) {
          if (done_s[s]) continue;
          double w = std::max(0.0, -reduced(s, t));
          if (dist_t[t] + w < dist_s[s]) {
            dist_s[s] = dist_t[t] + w;
            pred_s[s] = t;
          }
        }
      } else {
        const int s = node;
        done_s[s] = 1;
        for (int t = 0; t < nt; ++t) {
          if (done_t[t]) continue;
          double w = std::max(0.0, reduced(s, t));
          if (dist_s[s] + w < dist_t[t]) {
            dist_t[t] = dist_s[s] + w;
            pred_t[t] = s;
          }
        }
      }
    }
    if (best_sink < 0) {
      if (left <= 1e-9 * scale) break;  // only dust left on one side
      throw NumericalError("transport: residual graph disconnected");
    }
    const double reach = dist_t[best_sink];

    // Bottleneck along the alternating path.
    double push = rem_demand[best_sink];
    for (int t = best_sink;;) {
      int s = pred_t[t];
      if (pred_s[s] < 0) {
        push = std::min(push, rem_supply[s]);
        break;
      }
      int tb = pred_s[s];
      push = std::min(push, flow_entry(s, tb)->second);
      t = tb;
    }

    // Augment.
    for (int t = best_sink;;) {
      int s = pred_t[t];
      add_flow(s, t, push);
      if (pred_s[s] < 0) {
        rem_supply[s] -= push;
        break;
      }
      int tb = pred_s[s];
      remove_flow(s, tb, push, eps_mass);
      t = tb;
    }
    rem_demand[best_sink] -= push;

    for (int s = 0; s < ns; ++s) {
      pot_s[s] -= std::min(dist_s[s], reach);
    }
    for (int t = 0; t < nt; ++t) {
      pot_t[t] -= std::min(dist_t[t], reach);
    }
    ++result.augmentations;
  }

  double total = 0.0;
  for (int s = 0; s < ns; ++s) {
    for (const auto& [t, amt] : flow[s]) total += amt * cost(s, t);
  }
  result.cost = total;

  double viol = 0.0;
  for (int s = 0; s < ns; ++s) {
    for (int t = 0; t < nt; ++t) viol = std::max(viol, -reduced(s, t));
    for (const auto& [t, amt] : flow[s]) {
      if (amt > eps_mass) viol = std::max(viol, std::abs(reduced(s, t)));
    }
  }
  result.dual_violation = viol;
  return result;
}

}  // namespace honest_ate
