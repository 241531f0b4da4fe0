#include "honest_ate/solution_path.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "honest_ate/errors.hpp"

namespace honest_ate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double activity_tol(double d) { return 1e-9 * (1.0 + std::abs(d)); }

// ---------------------------------------------------------------------------
// Arm-local mirror of the path state. Controls are indexed j = 0..n0-1 and
// treated units i = 0..n1-1. Family 0 edges carry the multipliers on the
// control-arm constraints r_treated <= m_control + D0; family 1 edges carry
// the multipliers on the treated-arm constraints r_control <= m_treated + D1.

struct Edge {
  int i;
  int j;
  double lam;
  double dlam;
};

struct Components {
  std::vector<int> comp0_ctrl, comp0_tr;  // family 0: clusters of controls
  std::vector<int> comp1_tr, comp1_ctrl;  // family 1: clusters of treated
  std::vector<int> cnt0_m, cnt0_r;
  std::vector<int> cnt1_m, cnt1_r;
  int k0 = 0, k1 = 0;
};

// Reused scratch buffers; knots arrive by the thousand, so the per-knot
// work must not allocate.
struct Workspace {
  std::vector<int> parent, comp_of;
  std::vector<char> flag;
  std::vector<int> degree, adj_off, adj_edge, node_stack;
  std::vector<char> edge_done, node_done;
  std::vector<double> balance;
  std::vector<int> core_edges, core_nodes, local_id;
  // tight-but-inactive pairs worth rechecking at knots, per family
  std::vector<std::pair<int, int>> riding0, riding1;
  // PCG scratch and warm-start potentials (indexed by graph node)
  std::vector<double> lam_cache0, lam_cache1;
  std::vector<double> cg_x, cg_r, cg_p, cg_z, cg_ap, cg_b;
  std::vector<int> core_off, core_adj_node, core_deg;
};

struct Local {
  Eigen::VectorXd mc, mt, rc, rt;
  Eigen::VectorXd dmc, dmt, drc, drt;
  std::vector<Edge> e0, e1;
  std::vector<char> mask0, mask1;  // n1 x n0, row-major
  int n0 = 0, n1 = 0;
  Components comp;
  Workspace ws;

  void resize(int n0_in, int n1_in) {
    n0 = n0_in;
    n1 = n1_in;
    mc.setZero(n0);
    rc.setZero(n0);
    mt.setZero(n1);
    rt.setZero(n1);
    dmc.setZero(n0);
    drc.setZero(n0);
    dmt.setZero(n1);
    drt.setZero(n1);
    mask0.assign(static_cast<std::size_t>(n0) * n1, 0);
    mask1.assign(static_cast<std::size_t>(n0) * n1, 0);
    e0.clear();
    e1.clear();
    ws.riding0.clear();
    ws.riding1.clear();
  }
  std::size_t at(int i, int j) const {
    return static_cast<std::size_t>(i) * n0 + j;
  }
};

int uf_find(std::vector<int>& parent, int a) {
  while (parent[a] != a) {
    parent[a] = parent[parent[a]];
    a = parent[a];
  }
  return a;
}

void uf_unite(std::vector<int>& parent, int a, int b) {
  a = uf_find(parent, a);
  b = uf_find(parent, b);
  if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

// Connected components of one family's active bipartite graph. Side M holds
// m_nodes nodes (ids 0..m_nodes-1) and side R holds r_nodes nodes (ids
// m_nodes..m_nodes+r_nodes-1 in the union-find).
void family_components(int m_nodes, int r_nodes,
                       const std::vector<Edge>& edges, bool m_side_is_ctrl,
                       Workspace& ws, std::vector<int>& comp_m,
                       std::vector<int>& comp_r, std::vector<int>& cnt_m,
                       std::vector<int>& cnt_r, int* k_out) {
  const int total = m_nodes + r_nodes;
  ws.parent.resize(total);
  std::iota(ws.parent.begin(), ws.parent.end(), 0);
  for (const Edge& e : edges) {
    int m = m_side_is_ctrl ? e.j : e.i;
    int r = m_side_is_ctrl ? e.i : e.j;
    uf_unite(ws.parent, m, m_nodes + r);
  }
  ws.comp_of.assign(total, -1);
  comp_m.resize(m_nodes);
  comp_r.resize(r_nodes);
  int k = 0;
  for (int v = 0; v < total; ++v) {
    int root = uf_find(ws.parent, v);
    if (ws.comp_of[root] < 0) ws.comp_of[root] = k++;
    (v < m_nodes ? comp_m[v] : comp_r[v - m_nodes]) = ws.comp_of[root];
  }
  *k_out = k;
  cnt_m.assign(k, 0);
  cnt_r.assign(k, 0);
  for (int v = 0; v < m_nodes; ++v) cnt_m[comp_m[v]]++;
  ws.flag.assign(r_nodes, 0);
  for (const Edge& e : edges) ws.flag[m_side_is_ctrl ? e.i : e.j] = 1;
  for (int v = 0; v < r_nodes; ++v) {
    if (ws.flag[v]) cnt_r[comp_r[v]]++;
  }
}

void find_components(Local& st) {
  family_components(st.n0, st.n1, st.e0, /*m_side_is_ctrl=*/true, st.ws,
                    st.comp.comp0_ctrl, st.comp.comp0_tr, st.comp.cnt0_m,
                    st.comp.cnt0_r, &st.comp.k0);
  family_components(st.n1, st.n0, st.e1, /*m_side_is_ctrl=*/false, st.ws,
                    st.comp.comp1_tr, st.comp.comp1_ctrl, st.comp.cnt1_m,
                    st.comp.cnt1_r, &st.comp.k1);
}

// Minimum-norm solution of the per-node balance equations
//   sum over incident edges of z_e = b[node]
// on a graph given as (node_a, node_b) pairs per edge. Pendant edges are
// forced by leaf peeling; remaining 2-cores are solved per component, small
// ones by dense complete orthogonal decomposition and large ones through
// the grounded normal equations A A^T (sparse Cholesky), whose solutions
// give the same minimum-norm edge values.
void solve_edge_balance(int n_nodes, const std::vector<Edge>& edges,
                        bool first_is_m, int m_nodes, Workspace& ws,
                        std::vector<Edge>& out_edges, double tol,
                        std::vector<double>& lam_cache) {
  const int ne = static_cast<int>(edges.size());
  auto node_a = [&](const Edge& e) { return first_is_m ? e.j : e.i; };
  auto node_b = [&](const Edge& e) {
    return m_nodes + (first_is_m ? e.i : e.j);
  };

  ws.degree.assign(n_nodes, 0);
  for (const Edge& e : edges) {
    ws.degree[node_a(e)]++;
    ws.degree[node_b(e)]++;
  }
  ws.adj_off.assign(n_nodes + 1, 0);
  for (int v = 0; v < n_nodes; ++v) ws.adj_off[v + 1] = ws.adj_off[v] + ws.degree[v];
  ws.adj_edge.resize(2 * ne);
  {
    std::vector<int>& cursor = ws.comp_of;  // reuse as cursor
    cursor.assign(n_nodes, 0);
    for (int e = 0; e < ne; ++e) {
      int a = node_a(edges[e]), b = node_b(edges[e]);
      ws.adj_edge[ws.adj_off[a] + cursor[a]++] = e;
      ws.adj_edge[ws.adj_off[b] + cursor[b]++] = e;
    }
  }
  ws.edge_done.assign(ne, 0);
  ws.node_done.assign(n_nodes, 0);
  ws.node_stack.clear();
  for (int v = 0; v < n_nodes; ++v) {
    if (ws.degree[v] == 1) ws.node_stack.push_back(v);
  }
  for (int e = 0; e < ne; ++e) out_edges[e].dlam = 0.0;

  while (!ws.node_stack.empty()) {
    int v = ws.node_stack.back();
    ws.node_stack.pop_back();
    if (ws.node_done[v] || ws.degree[v] != 1) continue;
    int live = -1;
    for (int k = ws.adj_off[v]; k < ws.adj_off[v + 1]; ++k) {
      if (!ws.edge_done[ws.adj_edge[k]]) {
        live = ws.adj_edge[k];
        break;
      }
    }
    if (live < 0) continue;
    out_edges[live].dlam = ws.balance[v];
    ws.balance[v] = 0.0;
    ws.node_done[v] = 1;
    ws.degree[v] = 0;
    ws.edge_done[live] = 1;
    int u = node_a(edges[live]) == v ? node_b(edges[live]) : node_a(edges[live]);
    ws.balance[u] -= out_edges[live].dlam;
    if (--ws.degree[u] == 1) ws.node_stack.push_back(u);
  }

  ws.core_edges.clear();
  for (int e = 0; e < ne; ++e) {
    if (!ws.edge_done[e]) ws.core_edges.push_back(e);
  }
  if (!ws.core_edges.empty()) {
    ws.parent.resize(n_nodes);
    std::iota(ws.parent.begin(), ws.parent.end(), 0);
    for (int e : ws.core_edges) {
      uf_unite(ws.parent, node_a(edges[e]), node_b(edges[e]));
    }
    // bucket core edges by component root
    std::sort(ws.core_edges.begin(), ws.core_edges.end(), [&](int a, int b) {
      int ra = uf_find(ws.parent, node_a(edges[a]));
      int rb = uf_find(ws.parent, node_a(edges[b]));
      if (ra != rb) return ra < rb;
      return a < b;
    });
    ws.local_id.assign(n_nodes, -1);
    std::size_t lo = 0;
    while (lo < ws.core_edges.size()) {
      int root = uf_find(ws.parent, node_a(edges[ws.core_edges[lo]]));
      std::size_t hi = lo;
      while (hi < ws.core_edges.size() &&
             uf_find(ws.parent, node_a(edges[ws.core_edges[hi]])) == root) {
        ++hi;
      }
      ws.core_nodes.clear();
      for (std::size_t k = lo; k < hi; ++k) {
        for (int v : {node_a(edges[ws.core_edges[k]]),
                      node_b(edges[ws.core_edges[k]])}) {
          if (ws.local_id[v] < 0) {
            ws.local_id[v] = static_cast<int>(ws.core_nodes.size());
            ws.core_nodes.push_back(v);
          }
        }
      }
      const int nv = static_cast<int>(ws.core_nodes.size());
      const int nec = static_cast<int>(hi - lo);
      if (nec <= 64) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nv, nec);
        Eigen::VectorXd rhs(nv);
        for (int v = 0; v < nv; ++v) rhs(v) = ws.balance[ws.core_nodes[v]];
        for (int col = 0; col < nec; ++col) {
          const Edge& e = edges[ws.core_edges[lo + col]];
          a(ws.local_id[node_a(e)], col) += 1.0;
          a(ws.local_id[node_b(e)], col) += 1.0;
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
        Eigen::VectorXd z = cod.solve(rhs);
        double resid = (a * z - rhs).lpNorm<Eigen::Infinity>();
        if (resid > tol) {
          throw InconsistentSystemError(
              "multiplier direction system residual " + std::to_string(resid));
        }
        for (int col = 0; col < nec; ++col) {
          out_edges[ws.core_edges[lo + col]].dlam = z(col);
        }
      } else {
        // Grounded normal equations (A A^T) lambda = b with node 0 of the
        // component pinned; any solution lambda yields the same minimum-norm
        // edge values A^T lambda. Solved by Jacobi-preconditioned conjugate
        // gradients warm-started from the previous knot's potentials; the
        // active set changes little between knots, so a handful of
        // iterations usually suffices.
        ws.core_deg.assign(nv, 0);
        for (int col = 0; col < nec; ++col) {
          const Edge& e = edges[ws.core_edges[lo + col]];
          ws.core_deg[ws.local_id[node_a(e)]]++;
          ws.core_deg[ws.local_id[node_b(e)]]++;
        }
        ws.core_off.assign(nv + 1, 0);
        for (int v = 0; v < nv; ++v) ws.core_off[v + 1] = ws.core_off[v] + ws.core_deg[v];
        ws.core_adj_node.resize(2 * static_cast<std::size_t>(nec));
        {
          std::vector<int>& cursor = ws.comp_of;
          for (int v = 0; v < nv; ++v) cursor[v] = 0;
          for (int col = 0; col < nec; ++col) {
            const Edge& e = edges[ws.core_edges[lo + col]];
            int u = ws.local_id[node_a(e)], v = ws.local_id[node_b(e)];
            ws.core_adj_node[ws.core_off[u] + cursor[u]++] = v;
            ws.core_adj_node[ws.core_off[v] + cursor[v]++] = u;
          }
          for (int v = 0; v < nv; ++v) cursor[v] = 0;
        }
        // matvec y = (deg + adjacency) x with node 0 projected out
        auto matvec = [&](const std::vector<double>& x, std::vector<double>& y) {
          for (int v = 0; v < nv; ++v) {
            if (v == 0) { y[v] = 0.0; continue; }
            double acc = ws.core_deg[v] * x[v];
            for (int k = ws.core_off[v]; k < ws.core_off[v + 1]; ++k) {
              int u = ws.core_adj_node[k];
              if (u != 0) acc += x[u];
            }
            y[v] = acc;
          }
        };
        ws.cg_b.assign(nv, 0.0);
        double bscale = 0.0;
        for (int v = 1; v < nv; ++v) {
          ws.cg_b[v] = ws.balance[ws.core_nodes[v]];
          bscale = std::max(bscale, std::abs(ws.cg_b[v]));
        }
        ws.cg_x.assign(nv, 0.0);
        for (int v = 1; v < nv; ++v) {
          int g = ws.core_nodes[v];
          if (g < static_cast<int>(lam_cache.size())) ws.cg_x[v] = lam_cache[g];
        }
        ws.cg_r.assign(nv, 0.0);
        ws.cg_p.assign(nv, 0.0);
        ws.cg_z.assign(nv, 0.0);
        ws.cg_ap.assign(nv, 0.0);
        matvec(ws.cg_x, ws.cg_r);
        for (int v = 1; v < nv; ++v) ws.cg_r[v] = ws.cg_b[v] - ws.cg_r[v];
        const double tol_cg = 1e-13 * (1.0 + bscale);
        double rz = 0.0;
        for (int v = 1; v < nv; ++v) {
          ws.cg_z[v] = ws.cg_r[v] / ws.core_deg[v];
          ws.cg_p[v] = ws.cg_z[v];
          rz += ws.cg_r[v] * ws.cg_z[v];
        }
        bool converged = false;
        const int max_iter = 4 * nv + 100;
        for (int it = 0; it < max_iter; ++it) {
          double rmax = 0.0;
          for (int v = 1; v < nv; ++v) rmax = std::max(rmax, std::abs(ws.cg_r[v]));
          if (rmax <= tol_cg) { converged = true; break; }
          matvec(ws.cg_p, ws.cg_ap);
          double pap = 0.0;
          for (int v = 1; v < nv; ++v) pap += ws.cg_p[v] * ws.cg_ap[v];
          if (!(pap > 0.0)) break;
          double alpha = rz / pap;
          for (int v = 1; v < nv; ++v) {
            ws.cg_x[v] += alpha * ws.cg_p[v];
            ws.cg_r[v] -= alpha * ws.cg_ap[v];
          }
          double rz_new = 0.0;
          for (int v = 1; v < nv; ++v) {
            ws.cg_z[v] = ws.cg_r[v] / ws.core_deg[v];
            rz_new += ws.cg_r[v] * ws.cg_z[v];
          }
          double beta = rz_new / rz;
          rz = rz_new;
          for (int v = 1; v < nv; ++v) ws.cg_p[v] = ws.cg_z[v] + beta * ws.cg_p[v];
        }
        if (!converged) {
          // direct fallback
          Eigen::SparseMatrix<double> aat(nv - 1, nv - 1);
          std::vector<Eigen::Triplet<double>> trips;
          trips.reserve(static_cast<std::size_t>(nec) * 4);
          for (int col = 0; col < nec; ++col) {
            const Edge& e = edges[ws.core_edges[lo + col]];
            int u = ws.local_id[node_a(e)] - 1;
            int v = ws.local_id[node_b(e)] - 1;
            if (u >= 0) trips.emplace_back(u, u, 1.0);
            if (v >= 0) trips.emplace_back(v, v, 1.0);
            if (u >= 0 && v >= 0) {
              trips.emplace_back(u, v, 1.0);
              trips.emplace_back(v, u, 1.0);
            }
          }
          aat.setFromTriplets(trips.begin(), trips.end());
          Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(aat);
          if (chol.info() != Eigen::Success) {
            throw InconsistentSystemError("core normal equations not SPD");
          }
          Eigen::VectorXd rhs(nv - 1);
          for (int v = 1; v < nv; ++v) rhs(v - 1) = ws.cg_b[v];
          Eigen::VectorXd lam = chol.solve(rhs);
          for (int v = 1; v < nv; ++v) ws.cg_x[v] = lam(v - 1);
        }
        double resid0 = -ws.balance[ws.core_nodes[0]];
        for (int col = 0; col < nec; ++col) {
          const Edge& e = edges[ws.core_edges[lo + col]];
          int u = ws.local_id[node_a(e)], v = ws.local_id[node_b(e)];
          out_edges[ws.core_edges[lo + col]].dlam = ws.cg_x[u] + ws.cg_x[v];
          if (u == 0 || v == 0) resid0 += ws.cg_x[u] + ws.cg_x[v];
        }
        if (std::abs(resid0) > 100.0 * tol * (1.0 + bscale)) {
          throw InconsistentSystemError(
              "multiplier balance residual " + std::to_string(resid0));
        }
        for (int v = 0; v < nv; ++v) {
          int g = ws.core_nodes[v];
          if (g >= static_cast<int>(lam_cache.size())) lam_cache.resize(g + 1, 0.0);
          lam_cache[g] = ws.cg_x[v];
        }
      }
      for (int v : ws.core_nodes) {
        ws.node_done[v] = 1;
        ws.local_id[v] = -1;
      }
      lo = hi;
    }
  }
  for (int v = 0; v < n_nodes; ++v) {
    if (!ws.node_done[v] && std::abs(ws.balance[v]) > tol) {
      throw InconsistentSystemError("multiplier balance residual " +
                                    std::to_string(std::abs(ws.balance[v])));
    }
  }
}

void compute_directions(Local& st, double w0, double w1, double s20,
                        double s21) {
  const Components& comp = st.comp;
  for (int j = 0; j < st.n0; ++j) {
    int k = comp.comp0_ctrl[j];
    double ratio = static_cast<double>(comp.cnt0_r[k]) / comp.cnt0_m[k];
    st.dmc(j) = s20 * (w0 + ratio * w1);
  }
  for (const Edge& e : st.e0) st.drt(e.i) = st.dmc(e.j);
  for (int i = 0; i < st.n1; ++i) {
    int k = comp.comp1_tr[i];
    double ratio = static_cast<double>(comp.cnt1_r[k]) / comp.cnt1_m[k];
    st.dmt(i) = s21 * (w1 + ratio * w0);
  }
  for (const Edge& e : st.e1) st.drc(e.j) = st.dmt(e.i);

  const double tol = 1e-9 * (1.0 + std::abs(w0) + std::abs(w1));
  {
    st.ws.balance.assign(st.n0 + st.n1, 0.0);
    for (int j = 0; j < st.n0; ++j) st.ws.balance[j] = st.dmc(j) / s20 - w0;
    st.ws.flag.assign(st.n1, 0);
    for (const Edge& e : st.e0) st.ws.flag[e.i] = 1;
    for (int i = 0; i < st.n1; ++i) {
      st.ws.balance[st.n0 + i] = st.ws.flag[i] ? w1 : 0.0;
    }
    solve_edge_balance(st.n0 + st.n1, st.e0, /*first_is_m=*/true, st.n0,
                       st.ws, st.e0, tol, st.ws.lam_cache0);
  }
  {
    st.ws.balance.assign(st.n0 + st.n1, 0.0);
    for (int i = 0; i < st.n1; ++i) st.ws.balance[i] = st.dmt(i) / s21 - w1;
    st.ws.flag.assign(st.n0, 0);
    for (const Edge& e : st.e1) st.ws.flag[e.j] = 1;
    for (int j = 0; j < st.n0; ++j) {
      st.ws.balance[st.n1 + j] = st.ws.flag[j] ? w0 : 0.0;
    }
    solve_edge_balance(st.n0 + st.n1, st.e1, /*first_is_m=*/false, st.n1,
                       st.ws, st.e1, tol, st.ws.lam_cache1);
  }
}

struct ScanResult {
  double step = kInf;
  std::vector<PathEvent> events;
};

// Single pass per family: track the minimum crossing/vanishing step while
// collecting candidates inside a conservative band around the running
// minimum, then filter against the final value.
ScanResult scan_step(const Local& st, const Eigen::MatrixXd& d0raw,
                     const Eigen::MatrixXd& d1raw) {
  ScanResult res;
  const double tol_den = 1e-13;
  double best = kInf;
  std::vector<std::pair<double, PathEvent>> cand;
  auto band = [&](double s) { return s + 1e-10 * (1.0 + s) + 1e-15; };
  auto offer = [&](double s, PathEventKind kind, int i, int j) {
    s = std::max(s, 0.0);
    if (s > band(best) && best < kInf) return;
    if (s < best) {
      best = s;
      if (cand.size() > 4096) {
        std::erase_if(cand,
                      [&](const auto& c) { return c.first > band(best); });
      }
    }
    cand.emplace_back(s, PathEvent{kind, i, j});
  };

  for (int i = 0; i < st.n1; ++i) {
    const double drt_i = st.drt(i);
    const double rt_i = st.rt(i);
    const char* mrow = &st.mask0[st.at(i, 0)];
    for (int j = 0; j < st.n0; ++j) {
      if (mrow[j]) continue;
      double den = drt_i - st.dmc(j);
      if (den <= tol_den) continue;
      offer((d0raw(i, j) + st.mc(j) - rt_i) / den, PathEventKind::activate0, i,
            j);
    }
  }
  for (int j = 0; j < st.n0; ++j) {
    const double drc_j = st.drc(j);
    const double rc_j = st.rc(j);
    for (int i = 0; i < st.n1; ++i) {
      if (st.mask1[st.at(i, j)]) continue;
      double den = drc_j - st.dmt(i);
      if (den <= tol_den) continue;
      offer((d1raw(i, j) + st.mt(i) - rc_j) / den, PathEventKind::activate1, i,
            j);
    }
  }
  for (const Edge& e : st.e0) {
    if (e.dlam < -1e-12) {
      offer(-e.lam / e.dlam, PathEventKind::deactivate0, e.i, e.j);
    }
  }
  for (const Edge& e : st.e1) {
    if (e.dlam < -1e-12) {
      offer(-e.lam / e.dlam, PathEventKind::deactivate1, e.i, e.j);
    }
  }
  if (best == kInf) return res;
  res.step = best;
  const double cut = band(best);
  for (const auto& [s, ev] : cand) {
    if (s <= cut) res.events.push_back(ev);
  }
  return res;
}

void advance(Local& st, double s) {
  st.mc += s * st.dmc;
  st.mt += s * st.dmt;
  st.rc += s * st.drc;
  st.rt += s * st.drt;
  for (Edge& e : st.e0) e.lam = std::max(0.0, e.lam + s * e.dlam);
  for (Edge& e : st.e1) e.lam = std::max(0.0, e.lam + s * e.dlam);
}

void apply_event(Local& st, const PathEvent& ev) {
  const std::size_t pos = st.at(ev.i, ev.j);
  switch (ev.kind) {
    case PathEventKind::activate0:
      if (!st.mask0[pos]) {
        st.mask0[pos] = 1;
        st.e0.push_back({ev.i, ev.j, 0.0, 0.0});
      }
      break;
    case PathEventKind::activate1:
      if (!st.mask1[pos]) {
        st.mask1[pos] = 1;
        st.e1.push_back({ev.i, ev.j, 0.0, 0.0});
      }
      break;
    case PathEventKind::deactivate0: {
      st.mask0[pos] = 0;
      auto it = std::find_if(st.e0.begin(), st.e0.end(), [&](const Edge& e) {
        return e.i == ev.i && e.j == ev.j;
      });
      if (it != st.e0.end()) st.e0.erase(it);
      st.ws.riding0.emplace_back(ev.i, ev.j);
      break;
    }
    case PathEventKind::deactivate1: {
      st.mask1[pos] = 0;
      auto it = std::find_if(st.e1.begin(), st.e1.end(), [&](const Edge& e) {
        return e.i == ev.i && e.j == ev.j;
      });
      if (it != st.e1.end()) st.e1.erase(it);
      st.ws.riding1.emplace_back(ev.i, ev.j);
      break;
    }
  }
}

// Degenerate-pivot handling at a knot. After the scheduled events fire, the
// directions are re-derived; a tight riding pair whose gap would turn
// negative is activated, and an active zero multiplier being pushed negative
// is dropped. Tight inactive pairs can only arise from deactivations (ties
// are activated together by the scan), so only the riding set needs
// rechecking. An edge toggles at most once per knot, which blocks
// flip-flops. All changes are appended to `record` so that a replay needs
// no re-resolution.
void resolve_knot(Local& st, const Eigen::MatrixXd& d0raw,
                  const Eigen::MatrixXd& d1raw, double w0, double w1,
                  double s20, double s21, double mu,
                  std::vector<PathEvent>* record) {
  std::vector<PathEvent> extra;
  std::vector<std::pair<int, int>> touched0, touched1;
  for (int round = 0;; ++round) {
    find_components(st);
    compute_directions(st, w0, w1, s20, s21);
    if (round == 64) {
      throw KKTViolationError("degenerate pivot did not settle at mu=" +
                              std::to_string(mu));
    }
    extra.clear();
    // prune riding pairs that re-activated or drifted away; flag violations
    auto sweep_riding = [&](std::vector<std::pair<int, int>>& riding,
                            const std::vector<char>& mask,
                            const Eigen::MatrixXd& draw, bool family0) {
      std::size_t keep = 0;
      for (const auto& [i, j] : riding) {
        const std::size_t pos = st.at(i, j);
        if (mask[pos]) continue;  // re-activated
        double gap = family0 ? draw(i, j) + st.mc(j) - st.rt(i)
                             : draw(i, j) + st.mt(i) - st.rc(j);
        if (gap > activity_tol(draw(i, j)) * (1.0 + mu)) continue;  // free
        double den = family0 ? st.drt(i) - st.dmc(j) : st.drc(j) - st.dmt(i);
        if (den > 1e-12) {
          extra.push_back({family0 ? PathEventKind::activate0
                                   : PathEventKind::activate1,
                           i, j});
        }
        riding[keep++] = {i, j};
      }
      riding.resize(keep);
    };
    sweep_riding(st.ws.riding0, st.mask0, d0raw, true);
    sweep_riding(st.ws.riding1, st.mask1, d1raw, false);
    for (const Edge& e : st.e0) {
      if (e.lam <= 1e-12 * (1.0 + mu) && e.dlam < -1e-12) {
        extra.push_back({PathEventKind::deactivate0, e.i, e.j});
      }
    }
    for (const Edge& e : st.e1) {
      if (e.lam <= 1e-12 * (1.0 + mu) && e.dlam < -1e-12) {
        extra.push_back({PathEventKind::deactivate1, e.i, e.j});
      }
    }
    if (extra.empty()) return;
    // toggle each edge at most once per knot
    std::size_t applied = 0;
    for (const PathEvent& ev : extra) {
      bool is0 = ev.kind == PathEventKind::activate0 ||
                 ev.kind == PathEventKind::deactivate0;
      bool activating = ev.kind == PathEventKind::activate0 ||
                        ev.kind == PathEventKind::activate1;
      const std::size_t pos = st.at(ev.i, ev.j);
      const std::vector<char>& mask = is0 ? st.mask0 : st.mask1;
      if (activating == static_cast<bool>(mask[pos])) continue;
      auto& touched = is0 ? touched0 : touched1;
      if (std::find(touched.begin(), touched.end(),
                    std::make_pair(ev.i, ev.j)) != touched.end()) {
        continue;
      }
      touched.emplace_back(ev.i, ev.j);
      apply_event(st, ev);
      if (record) record->push_back(ev);
      ++applied;
    }
    if (applied == 0) return;  // only blocked toggles remained
  }
}

void init_local(Local& st, const Eigen::MatrixXd& d0raw,
                const Eigen::MatrixXd& d1raw) {
  const int n1 = static_cast<int>(d0raw.rows());
  const int n0 = static_cast<int>(d0raw.cols());
  st.resize(n0, n1);
  for (int i = 0; i < n1; ++i) {
    double best = d0raw.row(i).minCoeff();
    st.rt(i) = best;
    for (int j = 0; j < n0; ++j) {
      if (d0raw(i, j) <= best + activity_tol(best)) {
        st.mask0[st.at(i, j)] = 1;
        st.e0.push_back({i, j, 0.0, 0.0});
      }
    }
  }
  for (int j = 0; j < n0; ++j) {
    double best = d1raw.col(j).minCoeff();
    st.rc(j) = best;
    for (int i = 0; i < n1; ++i) {
      if (d1raw(i, j) <= best + activity_tol(best)) {
        st.mask1[st.at(i, j)] = 1;
        st.e1.push_back({i, j, 0.0, 0.0});
      }
    }
  }
}

KnotSummary make_summary(const Local& st, double mu, double w0, double w1,
                         double s20, double s21) {
  KnotSummary k;
  k.mu = mu;
  k.qa = st.mc.squaredNorm() / s20 + st.mt.squaredNorm() / s21;
  k.qb = st.mc.dot(st.dmc) / s20 + st.mt.dot(st.dmt) / s21;
  k.qc = st.dmc.squaredNorm() / s20 + st.dmt.squaredNorm() / s21;
  k.lw = w0 * (st.mc.sum() + st.rc.sum()) + w1 * (st.mt.sum() + st.rt.sum());
  k.lwd =
      w0 * (st.dmc.sum() + st.drc.sum()) + w1 * (st.dmt.sum() + st.drt.sum());
  k.nm = st.mt.sum() / s21;
  k.dnm = st.dmt.sum() / s21;
  return k;
}

void check_knot(const Local& st, double mu, double w0, double w1, double s20,
                double s21, const Eigen::MatrixXd& d0raw,
                const Eigen::MatrixXd& d1raw, bool exhaustive) {
  const double tol = 1e-8 * (1.0 + mu);
  std::vector<double> row0(st.n1, 0.0), col0(st.n0, 0.0);
  std::vector<double> row1(st.n1, 0.0), col1(st.n0, 0.0);
  for (const Edge& e : st.e0) {
    if (e.lam < -1e-10) throw KKTViolationError("negative family-0 multiplier");
    row0[e.i] += e.lam;
    col0[e.j] += e.lam;
    if (std::abs(st.rt(e.i) - st.mc(e.j) - d0raw(e.i, e.j)) >
        tol * (1.0 + d0raw(e.i, e.j))) {
      throw KKTViolationError("family-0 active constraint not tight at mu=" +
                              std::to_string(mu));
    }
  }
  for (const Edge& e : st.e1) {
    if (e.lam < -1e-10) throw KKTViolationError("negative family-1 multiplier");
    row1[e.i] += e.lam;
    col1[e.j] += e.lam;
    if (std::abs(st.rc(e.j) - st.mt(e.i) - d1raw(e.i, e.j)) >
        tol * (1.0 + d1raw(e.i, e.j))) {
      throw KKTViolationError("family-1 active constraint not tight at mu=" +
                              std::to_string(mu));
    }
  }
  for (int j = 0; j < st.n0; ++j) {
    if (std::abs(st.mc(j) / s20 - mu * w0 - col0[j]) > tol ||
        std::abs(mu * w0 - col1[j]) > tol) {
      throw KKTViolationError("control-side stationarity violated at mu=" +
                              std::to_string(mu));
    }
  }
  for (int i = 0; i < st.n1; ++i) {
    if (std::abs(st.mt(i) / s21 - mu * w1 - row1[i]) > tol ||
        std::abs(mu * w1 - row0[i]) > tol) {
      throw KKTViolationError("treated-side stationarity violated at mu=" +
                              std::to_string(mu));
    }
  }
  if (exhaustive) {
    for (int i = 0; i < st.n1; ++i) {
      for (int j = 0; j < st.n0; ++j) {
        if (st.rt(i) - st.mc(j) - d0raw(i, j) > tol ||
            st.rc(j) - st.mt(i) - d1raw(i, j) > tol ||
            st.mt(i) - st.rc(j) - d1raw(i, j) > tol ||
            st.mc(j) - st.rt(i) - d0raw(i, j) > tol) {
          throw KKTViolationError("cross-arm primal feasibility violated");
        }
      }
    }
  }
}

PathState to_public(const Local& st, double mu,
                    const std::vector<Eigen::Index>& treated_rows,
                    const std::vector<Eigen::Index>& control_rows) {
  PathState out;
  out.mu = mu;
  const Eigen::Index n =
      static_cast<Eigen::Index>(treated_rows.size() + control_rows.size());
  out.m.setZero(n);
  out.r.setZero(n);
  for (int j = 0; j < st.n0; ++j) {
    out.m(control_rows[j]) = st.mc(j);
    out.r(control_rows[j]) = st.rc(j);
  }
  for (int i = 0; i < st.n1; ++i) {
    out.m(treated_rows[i]) = st.mt(i);
    out.r(treated_rows[i]) = st.rt(i);
  }
  out.lam0.reserve(st.e0.size());
  for (const Edge& e : st.e0) out.lam0.push_back({e.i, e.j, e.lam});
  out.lam1.reserve(st.e1.size());
  for (const Edge& e : st.e1) out.lam1.push_back({e.i, e.j, e.lam});
  out.treated_rows = treated_rows;
  out.control_rows = control_rows;
  return out;
}

Local to_local(const PathState& state, Eigen::Index n0, Eigen::Index n1) {
  Local st;
  st.resize(static_cast<int>(n0), static_cast<int>(n1));
  for (int j = 0; j < st.n0; ++j) {
    st.mc(j) = state.m(state.control_rows[j]);
    st.rc(j) = state.r(state.control_rows[j]);
  }
  for (int i = 0; i < st.n1; ++i) {
    st.mt(i) = state.m(state.treated_rows[i]);
    st.rt(i) = state.r(state.treated_rows[i]);
  }
  for (const MultiplierEntry& e : state.lam0) {
    st.mask0[st.at(e.i, e.j)] = 1;
    st.e0.push_back({e.i, e.j, e.value, 0.0});
  }
  for (const MultiplierEntry& e : state.lam1) {
    st.mask1[st.at(e.i, e.j)] = 1;
    st.e1.push_back({e.i, e.j, e.value, 0.0});
  }
  return st;
}

void extract_arm_setup(const Sample& sample, const TargetWeights& target,
                       const VarianceSpec& arm_variances, double* w0,
                       double* w1, double* s20, double* s21) {
  if (!target.arm_level(sample, w0, w1)) {
    throw NotArmLevelError(
        "solution path requires arm-level target weights (CATE/CATT)");
  }
  if (!arm_variances.arm_level(sample, s20, s21)) {
    throw NotArmLevelError(
        "solution path requires arm-level variances; use the modulus solver "
        "for per-observation variances");
  }
  if (!(*s20 > 0.0) || !(*s21 > 0.0)) {
    throw DataError("arm variances must be strictly positive");
  }
}

}  // namespace
// ---------------------------------------------------------------------------

struct SolutionPath::Checkpoint {
  std::size_t knot = 0;
  Eigen::VectorXd mc, mt, rc, rt;
  std::vector<Edge> e0, e1;
};

SolutionPath::SolutionPath() = default;
SolutionPath::~SolutionPath() = default;
SolutionPath::SolutionPath(const SolutionPath&) = default;
SolutionPath::SolutionPath(SolutionPath&&) noexcept = default;
SolutionPath& SolutionPath::operator=(const SolutionPath&) = default;
SolutionPath& SolutionPath::operator=(SolutionPath&&) noexcept = default;

Eigen::MatrixXd PathState::effective_d0(const DistanceMatrices& dist) const {
  Eigen::MatrixXd out = dist.d0;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    out.col(j).array() += m(control_rows[j]);
  }
  return out;
}

Eigen::MatrixXd PathState::effective_d1(const DistanceMatrices& dist) const {
  Eigen::MatrixXd out = dist.d1;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i).array() += m(treated_rows[i]);
  }
  return out;
}

PathState init_path(const DistanceMatrices& distances, const Sample& sample,
                    const TargetWeights& target,
                    const VarianceSpec& arm_variances) {
  double w0, w1, s20, s21;
  extract_arm_setup(sample, target, arm_variances, &w0, &w1, &s20, &s21);
  Local st;
  init_local(st, distances.d0, distances.d1);
  return to_public(st, 0.0, distances.treated_rows, distances.control_rows);
}

ClusterPartition clusters(const PathState& state, Eigen::Index n0,
                          Eigen::Index n1) {
  Local st = to_local(state, n0, n1);
  find_components(st);
  const Components& comp = st.comp;
  ClusterPartition out;
  out.m0.resize(comp.k0);
  out.r0.resize(comp.k0);
  out.m1.resize(comp.k1);
  out.r1.resize(comp.k1);
  for (int j = 0; j < st.n0; ++j) out.m0[comp.comp0_ctrl[j]].push_back(j);
  {
    std::vector<char> seen(st.n1, 0);
    for (const Edge& e : st.e0) {
      if (!seen[e.i]) {
        seen[e.i] = 1;
        out.r0[comp.comp0_tr[e.i]].push_back(e.i);
      }
    }
    for (auto& v : out.r0) std::sort(v.begin(), v.end());
  }
  for (int i = 0; i < st.n1; ++i) out.m1[comp.comp1_tr[i]].push_back(i);
  {
    std::vector<char> seen(st.n0, 0);
    for (const Edge& e : st.e1) {
      if (!seen[e.j]) {
        seen[e.j] = 1;
        out.r1[comp.comp1_ctrl[e.j]].push_back(e.j);
      }
    }
    for (auto& v : out.r1) std::sort(v.begin(), v.end());
  }
  return out;
}

PathDirections directions(const PathState& state,
                          const ClusterPartition& partition,
                          const Sample& sample, const TargetWeights& target,
                          const VarianceSpec& arm_variances) {
  (void)partition;  // recomputed from the state's active sets
  double w0, w1, s20, s21;
  extract_arm_setup(sample, target, arm_variances, &w0, &w1, &s20, &s21);
  const Eigen::Index n0 = static_cast<Eigen::Index>(state.control_rows.size());
  const Eigen::Index n1 = static_cast<Eigen::Index>(state.treated_rows.size());
  Local st = to_local(state, n0, n1);
  find_components(st);
  compute_directions(st, w0, w1, s20, s21);

  PathDirections out;
  out.dm.setZero(n0 + n1);
  out.dr.setZero(n0 + n1);
  for (int j = 0; j < st.n0; ++j) {
    out.dm(state.control_rows[j]) = st.dmc(j);
    out.dr(state.control_rows[j]) = st.drc(j);
  }
  for (int i = 0; i < st.n1; ++i) {
    out.dm(state.treated_rows[i]) = st.dmt(i);
    out.dr(state.treated_rows[i]) = st.drt(i);
  }
  for (const Edge& e : st.e0) out.dlam0.push_back({e.i, e.j, e.dlam});
  for (const Edge& e : st.e1) out.dlam1.push_back({e.i, e.j, e.dlam});
  return out;
}

StepResult step_size(const PathState& state, const PathDirections& dirs,
                     const DistanceMatrices& distances) {
  const Eigen::Index n0 = distances.d0.cols();
  const Eigen::Index n1 = distances.d0.rows();
  Local st = to_local(state, n0, n1);
  for (int j = 0; j < st.n0; ++j) {
    st.dmc(j) = dirs.dm(state.control_rows[j]);
    st.drc(j) = dirs.dr(state.control_rows[j]);
  }
  for (int i = 0; i < st.n1; ++i) {
    st.dmt(i) = dirs.dm(state.treated_rows[i]);
    st.drt(i) = dirs.dr(state.treated_rows[i]);
  }
  for (std::size_t e = 0; e < dirs.dlam0.size() && e < st.e0.size(); ++e) {
    st.e0[e].dlam = dirs.dlam0[e].value;
  }
  for (std::size_t e = 0; e < dirs.dlam1.size() && e < st.e1.size(); ++e) {
    st.e1[e].dlam = dirs.dlam1[e].value;
  }
  ScanResult scan = scan_step(st, distances.d0, distances.d1);
  StepResult out;
  out.step = scan.step;
  out.events = std::move(scan.events);
  return out;
}

SolutionPath trace_path(const Sample& sample, const LipschitzSpec& lipschitz,
                        const TargetWeights& target,
                        const VarianceSpec& arm_variances,
                        const PathOptions& options) {
  if (!lipschitz.monotone_indices.empty()) {
    throw ConfigError(
        "the solution path does not support monotone constraints; they are "
        "honored by the worst-case-bias LP only");
  }
  validate_sample(sample);
  arm_variances.validate(sample);

  SolutionPath path;
  path.dist_ = cross_distances(sample, lipschitz.norm);
  path.target_ = target;
  extract_arm_setup(sample, target, arm_variances, &path.w0_, &path.w1_,
                    &path.s20_, &path.s21_);

  const int n0 = static_cast<int>(path.n0());
  const int n1 = static_cast<int>(path.n1());
  const long max_knots =
      static_cast<long>(options.max_knots_factor) * (n0 + n1) + 16;
  const bool small = static_cast<long>(n0) * n1 <= 65536;
  int stride = options.checkpoint_stride;
  if (stride <= 0) stride = small ? 16 : 256;

  Local st;
  init_local(st, path.dist_.d0, path.dist_.d1);
  double mu = 0.0;
  path.events_.emplace_back();
  resolve_knot(st, path.dist_.d0, path.dist_.d1, path.w0_, path.w1_, path.s20_,
               path.s21_, mu, &path.events_.back());
  path.knots_.push_back(
      make_summary(st, mu, path.w0_, path.w1_, path.s20_, path.s21_));
  path.checkpoints_.push_back({0, st.mc, st.mt, st.rc, st.rt, st.e0, st.e1});

  while (true) {
    if (options.validate_knots) {
      bool exhaustive = small || (path.knots_.size() % 512 == 0);
      check_knot(st, mu, path.w0_, path.w1_, path.s20_, path.s21_,
                 path.dist_.d0, path.dist_.d1, exhaustive);
    }
    ScanResult scan = scan_step(st, path.dist_.d0, path.dist_.d1);
    if (scan.step == kInf || mu + scan.step >= options.mu_max) {
      path.reached_terminal_ = (scan.step == kInf);
      break;
    }
    if (static_cast<long>(path.knots_.size()) > max_knots) {
      throw MaxKnotsExceededError("knot cap exceeded at mu=" +
                                  std::to_string(mu));
    }
    // Advance by exactly the difference of stored knot values so that
    // replays (which only see the knot mus) reproduce the state bitwise.
    double mu_next = mu + scan.step;
    advance(st, mu_next - mu);
    mu = mu_next;
    path.events_.push_back(scan.events);
    for (const PathEvent& ev : scan.events) apply_event(st, ev);
    resolve_knot(st, path.dist_.d0, path.dist_.d1, path.w0_, path.w1_,
                 path.s20_, path.s21_, mu, &path.events_.back());
    path.knots_.push_back(
        make_summary(st, mu, path.w0_, path.w1_, path.s20_, path.s21_));
    if (path.knots_.size() % stride == 0) {
      path.checkpoints_.push_back(
          {path.knots_.size() - 1, st.mc, st.mt, st.rc, st.rt, st.e0, st.e1});
    }
  }
  return path;
}

SolutionPath SolutionPath::from_archive(
    DistanceMatrices dist, TargetWeights target, double w0, double w1,
    double s20, double s21, std::vector<KnotSummary> knots,
    std::vector<std::vector<PathEvent>> events, bool reached_terminal) {
  SolutionPath path;
  path.dist_ = std::move(dist);
  path.target_ = std::move(target);
  path.w0_ = w0;
  path.w1_ = w1;
  path.s20_ = s20;
  path.s21_ = s21;
  path.knots_ = std::move(knots);
  path.events_ = std::move(events);
  path.reached_terminal_ = reached_terminal;
  if (path.knots_.empty() || path.events_.size() != path.knots_.size()) {
    throw DataError("path archive is inconsistent");
  }

  const int n0 = static_cast<int>(path.n0());
  const int n1 = static_cast<int>(path.n1());
  const bool small = static_cast<long>(n0) * n1 <= 65536;
  const std::size_t stride = small ? 16 : 256;

  Local st;
  init_local(st, path.dist_.d0, path.dist_.d1);
  for (const PathEvent& ev : path.events_[0]) apply_event(st, ev);
  path.checkpoints_.push_back({0, st.mc, st.mt, st.rc, st.rt, st.e0, st.e1});
  for (std::size_t k = 1; k < path.knots_.size(); ++k) {
    find_components(st);
    compute_directions(st, w0, w1, s20, s21);
    advance(st, path.knots_[k].mu - path.knots_[k - 1].mu);
    for (const PathEvent& ev : path.events_[k]) apply_event(st, ev);
    if ((k + 1) % stride == 0) {
      path.checkpoints_.push_back({k, st.mc, st.mt, st.rc, st.rt, st.e0, st.e1});
    }
  }
  return path;
}

std::size_t SolutionPath::segment_index(double mu) const {
  if (mu <= knots_.front().mu) return 0;
  std::size_t lo = 0, hi = knots_.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi + 1) / 2;
    if (knots_[mid].mu <= mu) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

KnotSummary SolutionPath::summary_at(double mu) const {
  const KnotSummary& k = knots_[segment_index(mu)];
  double s = mu - k.mu;
  KnotSummary out = k;
  out.mu = mu;
  out.qa = k.qa + 2.0 * k.qb * s + k.qc * s * s;
  out.qb = k.qb + k.qc * s;
  out.lw = k.lw + k.lwd * s;
  out.nm = k.nm + k.dnm * s;
  return out;
}

namespace {

// Rebuild the local state at a knot by replaying recorded events from the
// nearest checkpoint at or before it. Directions are left computed for the
// segment that starts at the target knot.
void replay_to(const DistanceMatrices& dist, double w0, double w1, double s20,
               double s21, const std::vector<KnotSummary>& knots,
               const std::vector<std::vector<PathEvent>>& events,
               const SolutionPath::Checkpoint& cp, std::size_t target_knot,
               Local& st) {
  st.resize(static_cast<int>(dist.d0.cols()), static_cast<int>(dist.d0.rows()));
  st.mc = cp.mc;
  st.mt = cp.mt;
  st.rc = cp.rc;
  st.rt = cp.rt;
  st.e0 = cp.e0;
  st.e1 = cp.e1;
  for (const Edge& e : st.e0) st.mask0[st.at(e.i, e.j)] = 1;
  for (const Edge& e : st.e1) st.mask1[st.at(e.i, e.j)] = 1;

  for (std::size_t k = cp.knot + 1; k <= target_knot; ++k) {
    find_components(st);
    compute_directions(st, w0, w1, s20, s21);
    advance(st, knots[k].mu - knots[k - 1].mu);
    for (const PathEvent& ev : events[k]) apply_event(st, ev);
  }
  find_components(st);
  compute_directions(st, w0, w1, s20, s21);
}

}  // namespace

PathState SolutionPath::state_at(double mu) const {
  std::size_t seg = segment_index(mu);
  const Checkpoint* cp = &checkpoints_.front();
  for (const Checkpoint& c : checkpoints_) {
    if (c.knot <= seg) cp = &c;
  }
  Local st;
  replay_to(dist_, w0_, w1_, s20_, s21_, knots_, events_, *cp, seg, st);
  double s = mu - knots_[seg].mu;
  if (s > 0.0) advance(st, s);
  return to_public(st, mu, dist_.treated_rows, dist_.control_rows);
}

PathDirections SolutionPath::directions_at(double mu) const {
  std::size_t seg = segment_index(mu);
  const Checkpoint* cp = &checkpoints_.front();
  for (const Checkpoint& c : checkpoints_) {
    if (c.knot <= seg) cp = &c;
  }
  Local st;
  replay_to(dist_, w0_, w1_, s20_, s21_, knots_, events_, *cp, seg, st);

  PathDirections out;
  out.dm.setZero(n0() + n1());
  out.dr.setZero(n0() + n1());
  for (int j = 0; j < st.n0; ++j) {
    out.dm(dist_.control_rows[j]) = st.dmc(j);
    out.dr(dist_.control_rows[j]) = st.drc(j);
  }
  for (int i = 0; i < st.n1; ++i) {
    out.dm(dist_.treated_rows[i]) = st.dmt(i);
    out.dr(dist_.treated_rows[i]) = st.drt(i);
  }
  for (const Edge& e : st.e0) out.dlam0.push_back({e.i, e.j, e.dlam});
  for (const Edge& e : st.e1) out.dlam1.push_back({e.i, e.j, e.dlam});
  return out;
}

double KktReport::worst(double mu) const {
  return std::max({stationarity, primal, slackness, dual}) / (1.0 + mu);
}

bool KktReport::ok(double mu, double tol_scale) const {
  return worst(mu) <= tol_scale;
}

KktReport kkt_report(const SolutionPath& path, const PathState& state,
                     const Eigen::MatrixXd* all_pairs) {
  KktReport rep;
  const double mu = state.mu;
  const int n0 = static_cast<int>(path.n0());
  const int n1 = static_cast<int>(path.n1());
  Local st = to_local(state, n0, n1);
  const double w0 = path.w0(), w1 = path.w1();
  const double s20 = path.sigma2_0(), s21 = path.sigma2_1();
  const Eigen::MatrixXd& d0 = path.distances().d0;
  const Eigen::MatrixXd& d1 = path.distances().d1;

  std::vector<double> row0(n1, 0.0), col0(n0, 0.0), row1(n1, 0.0), col1(n0, 0.0);
  for (const Edge& e : st.e0) {
    rep.dual = std::max(rep.dual, -e.lam);
    row0[e.i] += e.lam;
    col0[e.j] += e.lam;
    rep.slackness =
        std::max(rep.slackness,
                 e.lam * std::abs(st.rt(e.i) - st.mc(e.j) - d0(e.i, e.j)));
  }
  for (const Edge& e : st.e1) {
    rep.dual = std::max(rep.dual, -e.lam);
    row1[e.i] += e.lam;
    col1[e.j] += e.lam;
    rep.slackness =
        std::max(rep.slackness,
                 e.lam * std::abs(st.rc(e.j) - st.mt(e.i) - d1(e.i, e.j)));
  }
  for (int j = 0; j < n0; ++j) {
    rep.stationarity = std::max(rep.stationarity,
                                std::abs(st.mc(j) / s20 - mu * w0 - col0[j]));
    rep.stationarity = std::max(rep.stationarity, std::abs(mu * w0 - col1[j]));
  }
  for (int i = 0; i < n1; ++i) {
    rep.stationarity = std::max(rep.stationarity,
                                std::abs(st.mt(i) / s21 - mu * w1 - row1[i]));
    rep.stationarity = std::max(rep.stationarity, std::abs(mu * w1 - row0[i]));
  }
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n0; ++j) {
      rep.primal = std::max(rep.primal, st.rt(i) - st.mc(j) - d0(i, j));
      rep.primal = std::max(rep.primal, st.rc(j) - st.mt(i) - d1(i, j));
      rep.primal = std::max(rep.primal, st.mt(i) - st.rc(j) - d1(i, j));
      rep.primal = std::max(rep.primal, st.mc(j) - st.rt(i) - d0(i, j));
    }
  }
  if (all_pairs != nullptr) {
    const auto& dd = *all_pairs;
    const auto& tr = state.treated_rows;
    const auto& cr = state.control_rows;
    for (int a = 0; a < n0; ++a) {
      for (int b = 0; b < n0; ++b) {
        if (a == b) continue;
        double dab = dd(cr[a], cr[b]);
        rep.primal = std::max(rep.primal, std::abs(st.mc(a) - st.mc(b)) - dab);
        rep.primal = std::max(rep.primal, std::abs(st.rc(a) - st.rc(b)) - dab);
      }
    }
    for (int a = 0; a < n1; ++a) {
      for (int b = 0; b < n1; ++b) {
        if (a == b) continue;
        double dab = dd(tr[a], tr[b]);
        rep.primal = std::max(rep.primal, std::abs(st.mt(a) - st.mt(b)) - dab);
        rep.primal = std::max(rep.primal, std::abs(st.rt(a) - st.rt(b)) - dab);
      }
    }
  }
  return rep;
}

}  // namespace honest_ate
