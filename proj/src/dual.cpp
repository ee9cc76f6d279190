#include "extot/dual.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>

namespace extot {

namespace {

std::vector<std::int64_t> snap_units(const std::vector<double>& v) {
  std::vector<std::int64_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_units(v[i]);
  return out;
}

std::vector<double> unsnap(const std::vector<std::int64_t>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = from_units(v[i]);
  return out;
}

}  // namespace

Transformer::Transformer(GridPtr grid, CostPtr cost, int threads)
    : grid_(std::move(grid)),
      cost_(std::move(cost)),
      table_(grid_, cost_, threads > 0 ? threads : default_threads()),
      threads_(threads > 0 ? threads : default_threads()) {}

std::vector<std::int64_t> Transformer::apply(const std::vector<std::int64_t>& in,
                                             bool fwd) const {
  const auto n = static_cast<std::size_t>(grid_->cells());
  if (in.size() != n) throw InvalidArgument("transform input size mismatch");
  std::vector<std::int64_t> out(n);
  parallel_for(n, threads_, [&](std::size_t o) {
    std::int64_t best = kCostInf;
    const auto oc = static_cast<std::int64_t>(o);
    for (std::size_t i = 0; i < n; ++i) {
      // forward: out(y) = min_x c(x,y) - in(x); reverse swaps the roles.
      const std::int64_t cu = fwd ? table_.units(static_cast<std::int64_t>(i), oc)
                                  : table_.units(oc, static_cast<std::int64_t>(i));
      if (cu >= kCostInf) continue;
      const std::int64_t cand = cu - in[i];
      if (cand < best) best = cand;
    }
    out[o] = best;
  });
  for (std::int64_t v : out) {
    if (v >= kCostInf) {
      throw InvalidArgument("cost cap leaves the transform undefined");
    }
  }
  return out;
}

std::vector<std::int64_t> Transformer::forward(const std::vector<std::int64_t>& xi) const {
  return apply(xi, true);
}

std::vector<std::int64_t> Transformer::reverse(const std::vector<std::int64_t>& zeta) const {
  return apply(zeta, false);
}

std::vector<std::int64_t> Transformer::negative_part(std::vector<std::int64_t> v) {
  for (auto& x : v) x = std::min<std::int64_t>(x, 0);
  return v;
}

std::vector<std::int64_t> Transformer::project(const std::vector<std::int64_t>& phi) const {
  return reverse(negative_part(forward(phi)));
}

std::vector<double> c_transform(const GridPtr& grid, const CostPtr& cost,
                                const std::vector<double>& xi, Transform dir,
                                int threads) {
  Transformer t(grid, cost, threads);
  const auto u = snap_units(xi);
  return unsnap(dir == Transform::Forward ? t.forward(u) : t.reverse(u));
}

std::vector<double> project_P(const GridPtr& grid, const CostPtr& cost,
                              const std::vector<double>& phi, int threads) {
  Transformer t(grid, cost, threads);
  return unsnap(t.project(snap_units(phi)));
}

PotentialPair::PotentialPair(GridPtr grid, CostPtr cost,
                             std::vector<std::int64_t> phi,
                             std::vector<std::int64_t> psi)
    : grid_(std::move(grid)), cost_(std::move(cost)), phi_(std::move(phi)), psi_(std::move(psi)) {
  const auto n = static_cast<std::size_t>(grid_->cells());
  if (phi_.size() != n || psi_.size() != n) {
    throw InvalidArgument("potential size mismatch");
  }
  for (std::int64_t p : psi_) {
    if (p > 0) throw InvalidArgument("psi must be <= 0");
  }
}

std::vector<double> PotentialPair::phi() const { return unsnap(phi_); }
std::vector<double> PotentialPair::psi() const { return unsnap(psi_); }

double PotentialPair::objective(const Field& f) const {
  if (!f.grid()->same_layout(*grid_)) {
    throw InvalidArgument("objective requires the pair's grid");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    s += f.values()[i] * from_units(phi_[i]) +
         (1.0 - f.values()[i]) * from_units(psi_[i]);
  }
  return s * grid_->cell_volume();
}

std::int64_t PotentialPair::feasibility_violation_units(int threads) const {
  const DisplacementTable table(grid_, cost_, threads > 0 ? threads : default_threads());
  const auto n = static_cast<std::size_t>(grid_->cells());
  std::atomic<std::int64_t> worst{INT64_MIN};
  parallel_for(n, threads > 0 ? threads : default_threads(), [&](std::size_t x) {
    std::int64_t local = INT64_MIN;
    for (std::size_t y = 0; y < n; ++y) {
      const std::int64_t cu = table.units(static_cast<std::int64_t>(x),
                                          static_cast<std::int64_t>(y));
      if (cu >= kCostInf) continue;
      local = std::max(local, phi_[x] + psi_[y] - cu);
    }
    std::int64_t cur = worst.load();
    while (local > cur && !worst.compare_exchange_weak(cur, local)) {
    }
  });
  return worst.load();
}

namespace {

// Canonical extension of sink duals: psi0 -> (psi0^cbar, ((psi0^cbar)^c)_-)
// followed by one projection step, which is a fixed point afterwards.
PotentialPair canonicalize(const Field& f, const Plan& plan,
                           const std::vector<std::int64_t>& sink_dual,
                           int threads) {
  const GridPtr& grid = f.grid();
  Transformer t(grid, plan.cost, threads);
  const auto n = static_cast<std::size_t>(grid->cells());

  std::int64_t big = 0;
  for (std::int64_t vl : sink_dual) big = std::max(big, std::abs(vl));
  for (std::size_t i = 0; i < plan.dual_u.size(); ++i) {
    big = std::max(big, std::abs(plan.dual_u[i]));
  }
  const std::int64_t big_neg =
      -(big + to_units(std::min(kLatticeRange, plan.cost->kbar(grid->diameter(), grid->dim()) + 1.0)) + 1);

  // Sink duals where capacity exists; unconstrained elsewhere.
  std::vector<std::int64_t> psi0(n, big_neg);
  const double scale = std::ldexp(1.0, plan.quantum_bits);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::floor((1.0 - f.values()[i]) * scale) > 0.0) psi0[i] = 0;
  }
  for (std::size_t j = 0; j < plan.sink_cells.size(); ++j) {
    psi0[static_cast<std::size_t>(plan.sink_cells[j])] =
        std::min<std::int64_t>(0, sink_dual[j]);
  }

  std::vector<std::int64_t> phi = t.reverse(psi0);
  std::vector<std::int64_t> psi = Transformer::negative_part(t.forward(phi));
  std::vector<std::int64_t> phi2 = t.reverse(psi);
  // By the projection identities, (phi2^c)_- == psi exactly.
  return PotentialPair(grid, plan.cost, std::move(phi2), std::move(psi));
}

}  // namespace

PotentialPair dual_from_plan(const Field& f, const Plan& plan, int threads) {
  if (!f.grid()->same_layout(*plan.grid)) {
    throw InvalidArgument("plan belongs to a different grid");
  }
  PotentialPair pair = canonicalize(f, plan, plan.dual_v, threads);
  const double ups = plan.value();
  const double gap = ups - pair.objective(f);
  if (std::abs(gap) > 1e-6 * (1.0 + std::abs(ups))) {
    throw InvalidArgument("plan is not optimal: duality gap " + std::to_string(gap));
  }
  return pair;
}

double duality_gap(const Field& f, const CostPtr& c, const SolveOptions& opt) {
  const Plan plan = solve_exterior(f, c, opt);
  const PotentialPair pair = canonicalize(f, plan, plan.dual_v, opt.threads);
  return plan.value() - pair.objective(f);
}

PotentialPair maximal_potential(const Field& f, const CostPtr& c,
                                const SolveOptions& opt) {
  const Plan plan = solve_exterior(f, c, opt);
  return maximal_potential(f, plan, opt.threads);
}

PotentialPair maximal_potential(const Field& f, const Plan& plan, int opt_threads) {
  const GridPtr& grid = f.grid();
  const CostPtr& c = plan.cost;
  const int threads = opt_threads > 0 ? opt_threads : default_threads();

  const std::size_t ns = plan.source_cells.size();
  const std::size_t nt = plan.sink_cells.size();
  if (ns == 0) {
    const auto n = static_cast<std::size_t>(grid->cells());
    return PotentialPair(grid, c, std::vector<std::int64_t>(n, 0),
                         std::vector<std::int64_t>(n, 0));
  }

  // Minimal optimal duals by shortest paths on the constraint graph:
  // nodes are u_1..u_ns (offset 0) and w_1..w_nt (offset ns, w = -v), plus
  // the root; dist(x) yields the coordinate-wise minimal solution
  // (u, w) = -dist, equivalently the maximal v.
  const DisplacementTable table(grid, c, threads);
  const auto n_nodes = ns + nt + 1;
  const std::size_t root = ns + nt;
  std::vector<std::int64_t> dist(n_nodes, INT64_MAX / 4);
  std::vector<char> inq(n_nodes, 0);
  std::deque<std::uint32_t> queue;
  dist[root] = 0;
  queue.push_back(static_cast<std::uint32_t>(root));
  inq[root] = 1;

  // Sparse tight arcs from the plan (w_j -> u_i with length -c_ij).
  std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>> tight(nt);
  std::vector<std::int32_t> src_of_cell(static_cast<std::size_t>(grid->cells()), -1);
  std::vector<std::int32_t> snk_of_cell(static_cast<std::size_t>(grid->cells()), -1);
  for (std::size_t i = 0; i < ns; ++i) src_of_cell[static_cast<std::size_t>(plan.source_cells[i])] = static_cast<std::int32_t>(i);
  for (std::size_t j = 0; j < nt; ++j) snk_of_cell[static_cast<std::size_t>(plan.sink_cells[j])] = static_cast<std::int32_t>(j);
  for (const auto& e : plan.entries) {
    const auto i = static_cast<std::uint32_t>(src_of_cell[static_cast<std::size_t>(e.source)]);
    const auto j = static_cast<std::size_t>(snk_of_cell[static_cast<std::size_t>(e.target)]);
    tight[j].push_back({i, -e.cost_units});
  }

  // Pair constraints u_i - w_j <= c_ij are needed only while c_ij can bind;
  // u is bounded by the flow duals, so pairs costlier than max(u_flow) are
  // slack automatically (cost increases along rays).
  std::int64_t max_u = 0;
  for (std::int64_t u : plan.dual_u) max_u = std::max(max_u, u);

  auto relax_from = [&](std::size_t node) {
    if (node == root) {
      for (std::size_t j = 0; j < nt; ++j) {
        if (dist[ns + j] > 0) {
          dist[ns + j] = 0;
          if (!inq[ns + j]) {
            queue.push_back(static_cast<std::uint32_t>(ns + j));
            inq[ns + j] = 1;
          }
        }
      }
    } else if (node >= ns) {
      const std::size_t j = node - ns;
      for (const auto& [i, len] : tight[j]) {
        if (dist[node] + len < dist[i]) {
          dist[i] = dist[node] + len;
          if (!inq[i]) {
            queue.push_back(i);
            inq[i] = 1;
          }
        }
      }
    } else {
      const std::int64_t cell = plan.source_cells[node];
      for (std::size_t j = 0; j < nt; ++j) {
        const std::int64_t cu = table.units(cell, plan.sink_cells[j]);
        if (cu >= kCostInf || cu > max_u + 1) continue;
        if (dist[node] + cu < dist[ns + j]) {
          dist[ns + j] = dist[node] + cu;
          if (!inq[ns + j]) {
            queue.push_back(static_cast<std::uint32_t>(ns + j));
            inq[ns + j] = 1;
          }
        }
      }
    }
  };

  std::size_t steps = 0;
  const std::size_t step_limit = n_nodes * n_nodes + 16;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    inq[v] = 0;
    relax_from(v);
    if (++steps > step_limit * 8) {
      throw InternalError("maximal potential relaxation did not settle");
    }
  }

  std::vector<std::int64_t> v_max(nt);
  for (std::size_t j = 0; j < nt; ++j) v_max[j] = dist[ns + j];

  // Certify optimal-face membership: the dual objective must equal the
  // primal optimum exactly.
  __int128 dual_obj = 0;
  const double scale = std::ldexp(1.0, plan.quantum_bits);
  for (std::size_t i = 0; i < ns; ++i) {
    const auto cell = static_cast<std::size_t>(plan.source_cells[i]);
    const auto s = static_cast<std::int64_t>(std::llround(f.values()[cell] * scale));
    dual_obj += static_cast<__int128>(s) * (-dist[i]);
  }
  for (std::size_t j = 0; j < nt; ++j) {
    const auto cell = static_cast<std::size_t>(plan.sink_cells[j]);
    const auto cap = static_cast<std::int64_t>(std::floor((1.0 - f.values()[cell]) * scale));
    dual_obj += static_cast<__int128>(cap) * v_max[j];
  }
  if (dual_obj != plan.objective_units) {
    throw InternalError("maximal potential left the optimal face");
  }

  PotentialPair pair = canonicalize(f, plan, v_max, threads);
  const double gap = plan.value() - pair.objective(f);
  if (std::abs(gap) > 1e-6 * (1.0 + std::abs(plan.value()))) {
    throw InternalError("maximal potential objective drifted: gap " +
                        std::to_string(gap));
  }
  return pair;
}

SlacknessReport slackness_report(const Field& f, const Plan& plan,
                                 const PotentialPair& pair, double tol) {
  const GridPtr& grid = f.grid();
  const double h = grid->spacing();
  SlacknessReport rep;
  if (tol <= 0.0) {
    const double lip = plan.cost->lipschitz(std::max(plan.r_active, h), h, grid->dim());
    tol = std::max(1e-6, 2.0 * h * lip);
  }
  rep.tol = tol;

  Transformer t(grid, plan.cost, 0);
  const std::vector<std::int64_t> chi = t.forward(t.reverse(pair.psi_units()));
  const Field g = plan_marginals(plan).second;
  const auto n = static_cast<std::size_t>(grid->cells());

  // Sign interface exclusion: one layer where the sign of chi changes.
  std::vector<std::int8_t> sign(n);
  for (std::size_t i = 0; i < n; ++i) {
    sign[i] = chi[i] < 0 ? -1 : (chi[i] > 0 ? 1 : 0);
  }
  const int dim = grid->dim();
  std::vector<std::uint8_t> excluded(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto multi = grid->multi_index(static_cast<std::int64_t>(i));
    for (int a = 0; a < dim && !excluded[i]; ++a) {
      for (int dr = -1; dr <= 1; dr += 2) {
        auto m2 = multi;
        m2[static_cast<std::size_t>(a)] += dr;
        if (m2[static_cast<std::size_t>(a)] < 0 ||
            m2[static_cast<std::size_t>(a)] >= grid->extent()[static_cast<std::size_t>(a)]) {
          continue;
        }
        if (sign[static_cast<std::size_t>(grid->linear_index(m2))] != sign[i]) {
          excluded[i] = 1;
          break;
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (excluded[i]) {
      ++rep.excluded_boundary;
      continue;
    }
    const double gv = g[static_cast<std::int64_t>(i)];
    if (sign[i] < 0) {
      ++rep.negative_cells;
      if (std::abs(f.values()[i] + gv - 1.0) > tol) ++rep.negative_violations;
    } else if (sign[i] > 0) {
      ++rep.positive_cells;
      if (gv > tol) ++rep.positive_violations;
    } else {
      ++rep.zero_cells;
    }
  }
  rep.negative_violation_fraction =
      rep.negative_cells ? static_cast<double>(rep.negative_violations) /
                               static_cast<double>(rep.negative_cells)
                         : 0.0;
  rep.positive_violation_fraction =
      rep.positive_cells ? static_cast<double>(rep.positive_violations) /
                               static_cast<double>(rep.positive_cells)
                         : 0.0;
  return rep;
}

}  // namespace extot
