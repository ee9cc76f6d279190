#include "extot/primal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>

#include "extot/flow.hpp"

namespace extot {

namespace {

std::int64_t supply_units(double f, int qbits) {
  return static_cast<std::int64_t>(std::llround(f * std::ldexp(1.0, qbits)));
}

std::int64_t capacity_units(double f, int qbits) {
  return static_cast<std::int64_t>(std::floor((1.0 - f) * std::ldexp(1.0, qbits)));
}

// Multi-index offsets with |offset| <= radius_cells, lexicographic order.
std::vector<std::vector<std::int64_t>> ball_offsets(int dim, std::int64_t radius_cells,
                                                    std::int64_t r2_limit) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> cur(static_cast<std::size_t>(dim), -radius_cells);
  while (true) {
    std::int64_t d2 = 0;
    for (std::int64_t v : cur) d2 += v * v;
    if (d2 <= r2_limit) out.push_back(cur);
    int axis = dim - 1;
    while (axis >= 0) {
      if (++cur[static_cast<std::size_t>(axis)] <= radius_cells) break;
      cur[static_cast<std::size_t>(axis)] = -radius_cells;
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

// Conservative radius beyond which k >= level everywhere, from a sampled
// suffix envelope of the spherical minimum of k. Knot radii of tabulated
// costs are included so dips between samples cannot be missed.
class CostInverse {
 public:
  CostInverse(const Cost& c, int dim, double r_max, double step) {
    for (double r = 0.0; r <= r_max + step; r += step) radii_.push_back(r);
    levels_.resize(radii_.size());
    for (std::size_t i = 0; i < radii_.size(); ++i) {
      levels_[i] = c.kmin_sphere(radii_[i], dim);
    }
    // Suffix minimum: env[i] = inf over r >= radii_[i].
    for (std::size_t i = radii_.size() - 1; i-- > 0;) {
      levels_[i] = std::min(levels_[i], levels_[i + 1]);
    }
    step_ = step;
  }

  // Smallest sampled radius r with inf_{|z| >= r} k(z) >= level (one step
  // of safety margin); r_max when the level is never cleared.
  double radius_for(double level) const {
    const auto it = std::lower_bound(levels_.begin(), levels_.end(), level);
    if (it == levels_.end()) return radii_.back() + step_;
    std::size_t i = static_cast<std::size_t>(it - levels_.begin());
    return radii_[i] + step_;
  }

 private:
  std::vector<double> radii_;
  std::vector<double> levels_;
  double step_ = 0.0;
};

struct Instance {
  std::vector<std::int64_t> src_cells, snk_cells;
  std::vector<std::int32_t> src_of_cell, snk_of_cell;  // -1 when absent
  std::vector<std::int64_t> supplies, caps;
  std::int64_t total_supply = 0, total_capacity = 0;
};

Instance build_instance(const Field& f, int qbits) {
  Instance ins;
  const auto n = static_cast<std::size_t>(f.grid()->cells());
  ins.src_of_cell.assign(n, -1);
  ins.snk_of_cell.assign(n, -1);
  for (std::size_t c = 0; c < n; ++c) {
    const std::int64_t s = supply_units(f.values()[c], qbits);
    if (s > 0) {
      ins.src_of_cell[c] = static_cast<std::int32_t>(ins.src_cells.size());
      ins.src_cells.push_back(static_cast<std::int64_t>(c));
      ins.supplies.push_back(s);
      ins.total_supply += s;
    }
    const std::int64_t cap = capacity_units(f.values()[c], qbits);
    if (cap > 0) {
      ins.snk_of_cell[c] = static_cast<std::int32_t>(ins.snk_cells.size());
      ins.snk_cells.push_back(static_cast<std::int64_t>(c));
      ins.caps.push_back(cap);
      ins.total_capacity += cap;
    }
  }
  return ins;
}

}  // namespace

double Plan::value() const {
  return static_cast<double>(objective_units) * quantum * kLatticeStep;
}

Plan solve_exterior(const Field& f, const CostPtr& c, const SolveOptions& opt) {
  const GridPtr& grid = f.grid();
  const int dim = grid->dim();
  const double h = grid->spacing();
  const int threads = opt.threads > 0 ? opt.threads : default_threads();
  const double m = f.mass();

  if (m > 0.5 * grid->total_volume() * (1.0 + 1e-12)) {
    throw Infeasible("mass " + std::to_string(m) +
                     " exceeds half the grid volume " +
                     std::to_string(grid->total_volume()));
  }

  Plan plan;
  plan.grid = grid;
  plan.cost = c;
  plan.quantum_bits = opt.quantum_bits;
  plan.quantum = grid->cell_volume() * std::ldexp(1.0, -opt.quantum_bits);

  Instance ins = build_instance(f, opt.quantum_bits);
  plan.total_supply_units = ins.total_supply;
  if (ins.total_supply == 0) {
    plan.r_proof = m > 0 ? support_radius(*c, dim, m) : 0.0;
    return plan;  // nothing to transport
  }
  if (ins.total_supply > ins.total_capacity) {
    throw Infeasible("quantized mass exceeds quantized free capacity");
  }

  const SupportRadius sr = support_radius_detail(*c, dim, m);
  plan.r_proof = sr.radius;
  const double r_grid = grid->diameter() + h;
  const double r_max = std::min({sr.radius, r_grid,
                                 c->has_cap() ? c->cap_radius() : r_grid});
  plan.r_capped = r_max < sr.radius;

  // Automatic start: radius of the ball holding mass m, plus slack. The
  // growth loop below recovers from an underestimate.
  double r_active = opt.start_radius;
  if (r_active <= 0.0) {
    const double wd = std::pow(std::acos(-1.0), dim / 2.0) /
                      std::tgamma(dim / 2.0 + 1.0);
    r_active = std::pow(m / wd, 1.0 / dim) + 4.0 * h;
  }
  r_active = std::min(std::max(r_active, 3.0 * h), r_max);

  const DisplacementTable table(grid, c, threads);
  CostInverse inverse(*c, dim, grid->diameter(), 0.5 * h);

  MinCostFlow* solved = nullptr;
  std::unique_ptr<MinCostFlow> mcf;
  while (true) {
    mcf = std::make_unique<MinCostFlow>(static_cast<std::int32_t>(ins.src_cells.size()),
                                        static_cast<std::int32_t>(ins.snk_cells.size()));
    for (std::size_t i = 0; i < ins.supplies.size(); ++i) {
      mcf->set_supply(static_cast<std::int32_t>(i), ins.supplies[i]);
    }
    for (std::size_t j = 0; j < ins.caps.size(); ++j) {
      mcf->set_capacity(static_cast<std::int32_t>(j), ins.caps[j]);
    }
    mcf->set_order_seed(opt.order_seed);

    const auto rc = static_cast<std::int64_t>(std::floor(r_active / h));
    const std::int64_t r2 = static_cast<std::int64_t>(
        std::floor((r_active / h) * (r_active / h) + 1e-9));
    const auto offsets = ball_offsets(dim, rc, r2);
    for (std::size_t si = 0; si < ins.src_cells.size(); ++si) {
      const std::int64_t cell = ins.src_cells[si];
      const auto multi = grid->multi_index(cell);
      for (const auto& off : offsets) {
        std::int64_t target = 0;
        bool ok = true;
        for (int a = 0; a < dim; ++a) {
          const std::int64_t idx = multi[static_cast<std::size_t>(a)] + off[static_cast<std::size_t>(a)];
          if (idx < 0 || idx >= grid->extent()[static_cast<std::size_t>(a)]) {
            ok = false;
            break;
          }
          target = target * grid->extent()[static_cast<std::size_t>(a)] + idx;
        }
        if (!ok) continue;
        const std::int32_t sj = ins.snk_of_cell[static_cast<std::size_t>(target)];
        if (sj < 0) continue;
        const std::int64_t cu = table.units(cell, target);
        if (cu >= kCostInf) continue;
        mcf->add_arc(static_cast<std::int32_t>(si), sj, cu);
      }
    }

    if (!mcf->solve()) {
      if (r_active >= r_max) {
        throw Infeasible("no feasible plan within the support radius");
      }
      r_active = std::min(r_max, r_active * 1.5 + 2.0 * h);
      continue;
    }

    if (!opt.dual_post_check) {
      solved = mcf.get();
      break;
    }

    // Certify global optimality: u_i + v_j <= c(x_i, y_j) for every pair,
    // not just the pruned arcs. Pairs farther than the inverse radius of
    // u_i are excluded by monotonicity of the cost along rays.
    const auto& u = mcf->dual_source();
    const auto& v = mcf->dual_sink();
    std::atomic<double> needed{0.0};
    parallel_for(ins.src_cells.size(), threads, [&](std::size_t si) {
      const std::int64_t cell = ins.src_cells[si];
      if (u[si] <= 0) return;
      const double reach = inverse.radius_for(from_units(u[si]));
      const auto rcells = static_cast<std::int64_t>(std::ceil(reach / h)) + 1;
      const auto multi = grid->multi_index(cell);
      std::vector<std::int64_t> lo(static_cast<std::size_t>(dim)), cur(static_cast<std::size_t>(dim));
      std::vector<std::int64_t> hi(static_cast<std::size_t>(dim));
      for (int a = 0; a < dim; ++a) {
        lo[static_cast<std::size_t>(a)] = std::max<std::int64_t>(0, multi[static_cast<std::size_t>(a)] - rcells);
        hi[static_cast<std::size_t>(a)] = std::min<std::int64_t>(grid->extent()[static_cast<std::size_t>(a)] - 1,
                                                                 multi[static_cast<std::size_t>(a)] + rcells);
        cur[static_cast<std::size_t>(a)] = lo[static_cast<std::size_t>(a)];
      }
      while (true) {
        std::int64_t target = 0;
        for (int a = 0; a < dim; ++a) {
          target = target * grid->extent()[static_cast<std::size_t>(a)] + cur[static_cast<std::size_t>(a)];
        }
        const std::int32_t sj = ins.snk_of_cell[static_cast<std::size_t>(target)];
        if (sj >= 0) {
          const std::int64_t cu = table.units(cell, target);
          if (cu < kCostInf && u[si] + v[static_cast<std::size_t>(sj)] > cu) {
            const std::int64_t d2 = grid->index_dist2(cell, target);
            const double len = h * std::sqrt(static_cast<double>(d2));
            double expect = needed.load();
            while (len > expect && !needed.compare_exchange_weak(expect, len)) {
            }
          }
        }
        int axis = dim - 1;
        while (axis >= 0) {
          if (++cur[static_cast<std::size_t>(axis)] <= hi[static_cast<std::size_t>(axis)]) break;
          cur[static_cast<std::size_t>(axis)] = lo[static_cast<std::size_t>(axis)];
          --axis;
        }
        if (axis < 0) break;
      }
    });
    if (needed.load() == 0.0) {
      solved = mcf.get();
      break;
    }
    if (r_active >= r_max) {
      throw InternalError("dual certificate failed at the maximal radius");
    }
    r_active = std::min(r_max, std::max(needed.load() + h, r_active * 1.25));
  }

  plan.r_active = r_active;
  plan.objective_units = solved->objective_units();

  std::int64_t max_d2 = 0;
  for (const auto& af : solved->flows()) {
    const std::int64_t src = ins.src_cells[static_cast<std::size_t>(af.source)];
    const std::int64_t dst = ins.snk_cells[static_cast<std::size_t>(af.sink)];
    plan.entries.push_back({src, dst, af.flow, af.cost});
    max_d2 = std::max(max_d2, grid->index_dist2(src, dst));
  }
  plan.max_arc_length = h * std::sqrt(static_cast<double>(max_d2));
  plan.source_cells = ins.src_cells;
  plan.sink_cells = ins.snk_cells;
  plan.dual_u = solved->dual_source();
  plan.dual_v = solved->dual_sink();
  return plan;
}

std::pair<Field, Field> plan_marginals(const Plan& plan) {
  Field first(plan.grid), second(plan.grid);
  const double unit = std::ldexp(1.0, -plan.quantum_bits);
  std::vector<std::int64_t> acc_f(static_cast<std::size_t>(plan.grid->cells()), 0);
  std::vector<std::int64_t> acc_g(static_cast<std::size_t>(plan.grid->cells()), 0);
  for (const auto& e : plan.entries) {
    acc_f[static_cast<std::size_t>(e.source)] += e.flow_units;
    acc_g[static_cast<std::size_t>(e.target)] += e.flow_units;
  }
  for (std::int64_t c = 0; c < plan.grid->cells(); ++c) {
    first.set(c, static_cast<double>(acc_f[static_cast<std::size_t>(c)]) * unit);
    second.set(c, static_cast<double>(acc_g[static_cast<std::size_t>(c)]) * unit);
  }
  return {std::move(first), std::move(second)};
}

SaturationReport saturation_report(const Field& f, const Plan& plan, double tol) {
  const GridPtr& grid = f.grid();
  const double h = grid->spacing();
  SaturationReport rep;
  if (tol <= 0.0) {
    const double lip = plan.cost->lipschitz(std::max(plan.r_active, h), h, grid->dim());
    tol = std::max(1e-6, 2.0 * h * lip);
  }
  rep.tol = tol;

  const Field g = plan_marginals(plan).second;
  const auto n = static_cast<std::size_t>(grid->cells());
  // 0 = active set E (g = 1-f), 1 = inactive (g = f), 2 = violation.
  std::vector<std::uint8_t> cls(n, 1);
  rep.set_E.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double dE = std::abs(g[static_cast<std::int64_t>(i)] - (1.0 - f.values()[i]));
    const double dI = std::abs(g[static_cast<std::int64_t>(i)] - f.values()[i]);
    if (dE <= tol && dE < dI) {
      cls[i] = 0;
      rep.set_E[i] = 1;
    } else if (dI <= tol) {
      cls[i] = 1;
    } else if (dE <= tol) {
      cls[i] = 0;
      rep.set_E[i] = 1;
    } else {
      cls[i] = 2;
    }
  }

  // Exclude one layer around the E / E^c interface.
  std::vector<std::uint8_t> excluded(n, 0);
  const int dim = grid->dim();
  const auto offsets = ball_offsets(dim, 1, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto multi = grid->multi_index(static_cast<std::int64_t>(i));
    bool near_E = false, near_I = false;
    for (const auto& off : offsets) {
      std::int64_t t = 0;
      bool ok = true;
      for (int a = 0; a < dim; ++a) {
        const std::int64_t idx = multi[static_cast<std::size_t>(a)] + off[static_cast<std::size_t>(a)];
        if (idx < 0 || idx >= grid->extent()[static_cast<std::size_t>(a)]) {
          ok = false;
          break;
        }
        t = t * grid->extent()[static_cast<std::size_t>(a)] + idx;
      }
      if (!ok) continue;
      if (cls[static_cast<std::size_t>(t)] == 0) near_E = true;
      if (cls[static_cast<std::size_t>(t)] == 1) near_I = true;
    }
    if (near_E && near_I) excluded[i] = 1;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (excluded[i]) {
      ++rep.excluded_boundary;
      continue;
    }
    ++rep.included;
    if (cls[i] == 2) {
      ++rep.violations;
      rep.violating_cells.push_back(static_cast<std::int64_t>(i));
    }
  }
  rep.fraction_classified =
      rep.included > 0
          ? 1.0 - static_cast<double>(rep.violations) / static_cast<double>(rep.included)
          : 1.0;
  return rep;
}

UniquenessReport second_marginal_uniqueness_check(const Field& f, const CostPtr& c,
                                                  int trials, const SolveOptions& opt) {
  if (trials < 2) throw InvalidArgument("uniqueness check needs trials >= 2");
  UniquenessReport rep;
  rep.trials = trials;
  std::vector<Field> marginals;
  std::optional<__int128> value;
  for (int t = 0; t < trials; ++t) {
    SolveOptions o = opt;
    o.order_seed = t == 0 ? 0 : 0x9e3779b9u * static_cast<std::uint64_t>(t);
    const Plan plan = solve_exterior(f, c, o);
    if (!value) {
      value = plan.objective_units;
    } else if (*value != plan.objective_units) {
      rep.values_identical = false;
    }
    marginals.push_back(plan_marginals(plan).second);
  }
  for (std::size_t a = 0; a < marginals.size(); ++a) {
    for (std::size_t b = a + 1; b < marginals.size(); ++b) {
      rep.max_l1_spread = std::max(rep.max_l1_spread,
                                   l1_distance(marginals[a], marginals[b]));
    }
  }
  return rep;
}

double classical_cost(const Field& f, const Field& g, const CostPtr& c,
                      const SolveOptions& opt) {
  if (!f.grid()->same_layout(*g.grid())) {
    throw InvalidArgument("classical cost requires identical grids");
  }
  const double mf = f.mass(), mg = g.mass();
  if (std::abs(mf - mg) > 1e-9 * (1.0 + std::abs(mf))) {
    throw InvalidArgument("classical cost requires equal masses");
  }
  const int qbits = opt.quantum_bits;
  const auto n = static_cast<std::size_t>(f.grid()->cells());
  std::vector<std::int64_t> s(n), d(n);
  std::int64_t ts = 0, td = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = supply_units(f.values()[i], qbits);
    d[i] = supply_units(g.values()[i], qbits);
    ts += s[i];
    td += d[i];
  }
  // Quantization can leave a few units of imbalance; shave them from the
  // largest entries deterministically.
  auto shave = [&](std::vector<std::int64_t>& a, std::int64_t excess) {
    while (excess > 0) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i] > a[best]) best = i;
      }
      if (a[best] <= 0) throw InternalError("cannot balance quantized masses");
      const std::int64_t take = std::min(excess, std::max<std::int64_t>(1, a[best] / 1024));
      a[best] -= take;
      excess -= take;
    }
  };
  if (ts > td) shave(s, ts - td);
  if (td > ts) shave(d, td - ts);

  std::vector<std::int32_t> src_ix, dst_ix;
  std::vector<std::int64_t> src_cells, dst_cells;
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] > 0) {
      src_cells.push_back(static_cast<std::int64_t>(i));
    }
    if (d[i] > 0) {
      dst_cells.push_back(static_cast<std::int64_t>(i));
    }
  }
  MinCostFlow mcf(static_cast<std::int32_t>(src_cells.size()),
                  static_cast<std::int32_t>(dst_cells.size()));
  for (std::size_t i = 0; i < src_cells.size(); ++i) {
    mcf.set_supply(static_cast<std::int32_t>(i), s[static_cast<std::size_t>(src_cells[i])]);
  }
  for (std::size_t j = 0; j < dst_cells.size(); ++j) {
    mcf.set_capacity(static_cast<std::int32_t>(j), d[static_cast<std::size_t>(dst_cells[j])]);
  }
  const int threads = opt.threads > 0 ? opt.threads : default_threads();
  const DisplacementTable table(f.grid(), c, threads);
  mcf.reserve_arcs(src_cells.size() * dst_cells.size());
  for (std::size_t i = 0; i < src_cells.size(); ++i) {
    for (std::size_t j = 0; j < dst_cells.size(); ++j) {
      const std::int64_t cu = table.units(src_cells[i], dst_cells[j]);
      if (cu >= kCostInf) continue;
      mcf.add_arc(static_cast<std::int32_t>(i), static_cast<std::int32_t>(j), cu);
    }
  }
  if (!mcf.solve()) {
    throw Infeasible("classical transport infeasible under the cost cap");
  }
  const double quantum = f.grid()->cell_volume() * std::ldexp(1.0, -qbits);
  return static_cast<double>(mcf.objective_units()) * quantum * kLatticeStep;
}

void write_plan_csv(std::ostream& os, const Plan& plan) {
  os << "source,target,mass,unit_cost\n";
  char buf[96];
  for (const auto& e : plan.entries) {
    std::snprintf(buf, sizeof buf, "%lld,%lld,%.12g,%.12g",
                  static_cast<long long>(e.source), static_cast<long long>(e.target),
                  plan.entry_mass(e), from_units(e.cost_units));
    os << buf << '\n';
  }
}

}  // namespace extot
