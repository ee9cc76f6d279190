#include "extot/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "extot/quadrature.hpp"

namespace extot {

namespace {

// Exact primal simplex for the dense transportation LP
//   min sum c_a x_a   s.t.  sum_j x_ij = s_i,  sum_i x_ij <= cap_j,  x >= 0.
// Total unimodularity keeps the basis inverse in {-1, 0, +1} and every
// pivot element equal to +1, so all arithmetic is integer and exact.
class ExactTransportSimplex {
 public:
  ExactTransportSimplex(std::vector<std::int64_t> supplies,
                        std::vector<std::int64_t> caps,
                        std::vector<std::array<std::int32_t, 2>> arcs,
                        std::vector<std::int64_t> costs)
      : s_(std::move(supplies)),
        cap_(std::move(caps)),
        arcs_(std::move(arcs)),
        cost_(std::move(costs)) {
    ns_ = static_cast<int>(s_.size());
    nt_ = static_cast<int>(cap_.size());
    m_ = ns_ + nt_;
    n_arc_ = static_cast<int>(arcs_.size());
    n_slack_ = nt_;
    n_art_ = ns_;
    n_all_ = n_arc_ + n_slack_ + n_art_;
  }

  // Returns false when infeasible.
  bool solve() {
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0);
    for (int r = 0; r < m_; ++r) binv_[static_cast<std::size_t>(r) * m_ + r] = 1;
    xb_.resize(static_cast<std::size_t>(m_));
    basis_.resize(static_cast<std::size_t>(m_));
    for (int i = 0; i < ns_; ++i) {
      basis_[static_cast<std::size_t>(i)] = n_arc_ + n_slack_ + i;  // artificial
      xb_[static_cast<std::size_t>(i)] = s_[static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < nt_; ++j) {
      basis_[static_cast<std::size_t>(ns_ + j)] = n_arc_ + j;  // slack
      xb_[static_cast<std::size_t>(ns_ + j)] = cap_[static_cast<std::size_t>(j)];
    }

    phase1_ = true;
    run();
    for (int r = 0; r < m_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] >= n_arc_ + n_slack_ &&
          xb_[static_cast<std::size_t>(r)] != 0) {
        return false;  // artificial stuck at a positive value
      }
    }
    phase1_ = false;
    run();
    return true;
  }

  __int128 objective() const {
    __int128 obj = 0;
    for (int r = 0; r < m_; ++r) {
      const int var = basis_[static_cast<std::size_t>(r)];
      if (var < n_arc_) {
        obj += static_cast<__int128>(cost_[static_cast<std::size_t>(var)]) *
               xb_[static_cast<std::size_t>(r)];
      }
    }
    return obj;
  }

  std::vector<std::array<std::int64_t, 3>> basic_arcs() const {
    std::vector<std::array<std::int64_t, 3>> out;
    for (int r = 0; r < m_; ++r) {
      const int var = basis_[static_cast<std::size_t>(r)];
      if (var < n_arc_ && xb_[static_cast<std::size_t>(r)] > 0) {
        out.push_back({arcs_[static_cast<std::size_t>(var)][0],
                       arcs_[static_cast<std::size_t>(var)][1],
                       xb_[static_cast<std::size_t>(r)]});
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::int64_t var_cost(int var) const {
    if (phase1_) return var >= n_arc_ + n_slack_ ? 1 : 0;
    return var < n_arc_ ? cost_[static_cast<std::size_t>(var)] : 0;
  }

  // Column of the constraint matrix: row indices with coefficient +1.
  void var_rows(int var, int rows[2], int& cnt) const {
    if (var < n_arc_) {
      rows[0] = arcs_[static_cast<std::size_t>(var)][0];
      rows[1] = ns_ + arcs_[static_cast<std::size_t>(var)][1];
      cnt = 2;
    } else if (var < n_arc_ + n_slack_) {
      rows[0] = ns_ + (var - n_arc_);
      cnt = 1;
    } else {
      rows[0] = var - n_arc_ - n_slack_;
      cnt = 1;
    }
  }

  void run() {
    std::vector<std::int64_t> y(static_cast<std::size_t>(m_));
    std::vector<std::int64_t> w(static_cast<std::size_t>(m_));
    while (true) {
      // Simplex multipliers y = c_B B^-1.
      for (int r = 0; r < m_; ++r) {
        std::int64_t acc = 0;
        for (int k = 0; k < m_; ++k) {
          const std::int64_t b = binv_[static_cast<std::size_t>(k) * m_ + r];
          if (b != 0) acc += var_cost(basis_[static_cast<std::size_t>(k)]) * b;
        }
        y[static_cast<std::size_t>(r)] = acc;
      }

      // Bland: entering variable is the first with a negative reduced cost.
      int enter = -1;
      int rows[2];
      int cnt = 0;
      for (int var = 0; var < n_all_; ++var) {
        if (phase1_ == false && var >= n_arc_ + n_slack_) break;  // no artificials
        var_rows(var, rows, cnt);
        std::int64_t red = var_cost(var);
        for (int k = 0; k < cnt; ++k) red -= y[static_cast<std::size_t>(rows[k])];
        if (red < 0) {
          bool in_basis = false;
          for (int r = 0; r < m_; ++r) {
            if (basis_[static_cast<std::size_t>(r)] == var) {
              in_basis = true;
              break;
            }
          }
          if (!in_basis) {
            enter = var;
            break;
          }
        }
      }
      if (enter < 0) return;  // optimal for this phase

      // w = B^-1 A_enter.
      var_rows(enter, rows, cnt);
      for (int r = 0; r < m_; ++r) {
        std::int64_t acc = 0;
        for (int k = 0; k < cnt; ++k) {
          acc += binv_[static_cast<std::size_t>(r) * m_ + rows[k]];
        }
        w[static_cast<std::size_t>(r)] = acc;
      }

      // Ratio test, ties by smallest basis variable (Bland).
      int leave = -1;
      std::int64_t best_ratio = 0;
      for (int r = 0; r < m_; ++r) {
        if (w[static_cast<std::size_t>(r)] <= 0) continue;
        if (w[static_cast<std::size_t>(r)] != 1) {
          throw InternalError("transportation simplex lost unimodularity");
        }
        const std::int64_t ratio = xb_[static_cast<std::size_t>(r)];
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio &&
             basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leave)])) {
          leave = r;
          best_ratio = ratio;
        }
      }
      if (leave < 0) throw InternalError("transportation LP unbounded");

      // Pivot: eliminate w from all other rows; pivot element is +1.
      for (int r = 0; r < m_; ++r) {
        if (r == leave || w[static_cast<std::size_t>(r)] == 0) continue;
        const std::int64_t factor = w[static_cast<std::size_t>(r)];
        for (int k = 0; k < m_; ++k) {
          binv_[static_cast<std::size_t>(r) * m_ + k] -=
              factor * binv_[static_cast<std::size_t>(leave) * m_ + k];
        }
        xb_[static_cast<std::size_t>(r)] -= factor * best_ratio;
      }
      xb_[static_cast<std::size_t>(leave)] = best_ratio;
      basis_[static_cast<std::size_t>(leave)] = enter;
    }
  }

  std::vector<std::int64_t> s_, cap_;
  std::vector<std::array<std::int32_t, 2>> arcs_;
  std::vector<std::int64_t> cost_;
  int ns_ = 0, nt_ = 0, m_ = 0, n_arc_ = 0, n_slack_ = 0, n_art_ = 0, n_all_ = 0;
  std::vector<std::int64_t> binv_;
  std::vector<std::int64_t> xb_;
  std::vector<int> basis_;
  bool phase1_ = true;
};

}  // namespace

BruteLpResult brute_lp(const Field& f, const CostPtr& c, int quantum_bits) {
  const GridPtr& grid = f.grid();
  if (grid->cells() > 200) {
    throw LimitExceeded("brute_lp supports at most 200 cells");
  }
  const double scale = std::ldexp(1.0, quantum_bits);

  std::vector<std::int64_t> src_cells, snk_cells, supplies, caps;
  for (std::int64_t cell = 0; cell < grid->cells(); ++cell) {
    const double v = f.values()[static_cast<std::size_t>(cell)];
    const auto s = static_cast<std::int64_t>(std::llround(v * scale));
    const auto cap = static_cast<std::int64_t>(std::floor((1.0 - v) * scale));
    if (s > 0) {
      src_cells.push_back(cell);
      supplies.push_back(s);
    }
    if (cap > 0) {
      snk_cells.push_back(cell);
      caps.push_back(cap);
    }
  }

  BruteLpResult res;
  if (src_cells.empty()) return res;

  const DisplacementTable table(grid, c, 1);
  std::vector<std::array<std::int32_t, 2>> arcs;
  std::vector<std::int64_t> costs;
  for (std::size_t i = 0; i < src_cells.size(); ++i) {
    for (std::size_t j = 0; j < snk_cells.size(); ++j) {
      const std::int64_t cu = table.units(src_cells[i], snk_cells[j]);
      if (cu >= kCostInf) continue;
      arcs.push_back({static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
      costs.push_back(cu);
    }
  }

  ExactTransportSimplex simplex(supplies, caps, std::move(arcs), std::move(costs));
  if (!simplex.solve()) {
    throw Infeasible("dense LP infeasible");
  }
  res.objective_units = simplex.objective();
  const double quantum = grid->cell_volume() * std::ldexp(1.0, -quantum_bits);
  res.value = static_cast<double>(res.objective_units) * quantum * kLatticeStep;
  for (const auto& e : simplex.basic_arcs()) {
    res.entries.push_back({src_cells[static_cast<std::size_t>(e[0])],
                           snk_cells[static_cast<std::size_t>(e[1])], e[2]});
  }
  return res;
}

double monotone_1d(double a, double b, double level, const CostPtr& c,
                   double abs_tol) {
  if (!(b > a)) throw InvalidArgument("monotone_1d needs a nonempty interval");
  if (!(level > 0.0 && level <= 1.0)) {
    throw InvalidArgument("monotone_1d needs a level in (0, 1]");
  }
  if (!c->radial()) throw InvalidArgument("monotone_1d needs a radial cost");
  // Convexity on sampled increments; the monotone pairing is only known
  // optimal for convex costs.
  {
    const double R = b - a + 1.0;
    const int n = 512;
    double prev_inc = -1e300;
    for (int i = 1; i <= n; ++i) {
      const double r0 = R * (i - 1) / n, r1 = R * i / n;
      const double inc = c->kbar(r1, 1) - c->kbar(r0, 1);
      if (inc < prev_inc - 1e-12) {
        throw InvalidArgument("monotone_1d refuses non-convex costs");
      }
      prev_inc = inc;
    }
  }
  if (level <= 0.5) return 0.0;  // the diagonal plan is admissible and free

  // Mass level on [-rho, rho]: the excess 2*level-1 leaves both sides
  // monotonically; a point at radius r lands at rho + (2*level-1)*r.
  const double rho = 0.5 * (b - a);
  const double excess = 2.0 * level - 1.0;
  const auto integrand = [&](double r) {
    return c->kbar(rho - (1.0 - excess) * r, 1);
  };
  return 2.0 * excess * integrate(integrand, 0.0, rho, abs_tol);
}

double exhaustive_bathtub(const GridPtr& grid, const std::vector<double>& xi,
                          double m) {
  const auto n = static_cast<std::size_t>(grid->cells());
  if (n > 12) throw LimitExceeded("exhaustive_bathtub supports at most 12 cells");
  if (xi.size() != n) throw InvalidArgument("exhaustive_bathtub size mismatch");
  const double hv = grid->cell_volume();

  double best = -1e300;
  std::vector<int> state(n, 0);  // values in {0, 1, 2} meaning {0, 1/2, 1}
  while (true) {
    double mass_acc = 0.0, pay = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = 0.5 * state[i];
      mass_acc += v * hv;
      pay += v * xi[i] * hv;
    }
    if (std::abs(mass_acc - m) <= 1e-12 * (1.0 + m)) best = std::max(best, pay);
    std::size_t pos = 0;
    while (pos < n && ++state[pos] == 3) state[pos++] = 0;
    if (pos == n) break;
  }
  if (best == -1e300) {
    throw InvalidArgument("no {0, 1/2, 1} field attains the requested mass");
  }
  return best;
}

}  // namespace extot
