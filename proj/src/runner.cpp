#include "extot/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>

#include "extot/dual.hpp"
#include "extot/optimize.hpp"
#include "extot/oracle.hpp"
#include "extot/rearrange.hpp"

namespace extot {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Seeded generators used by the property suites. Dyadic values (multiples of
// 1/1024) quantize exactly, so solver marginals and oracle comparisons are
// free of rounding slack.

Field random_field(const GridPtr& grid, Rng& rng, double fill = 0.35,
                   double max_level = 1.0) {
  Field f(grid);
  const auto n = static_cast<std::size_t>(grid->cells());
  for (std::size_t c = 0; c < n; ++c) {
    if (rng.uniform(0.0, 1.0) < fill) {
      double v = rng.dyadic01() * max_level;
      v = std::min(1.0, std::round(v * 1024.0) / 1024.0);
      f.set(static_cast<std::int64_t>(c), v);
    }
  }
  // Keep the instance comfortably feasible.
  const double cap = 0.45 * grid->total_volume();
  if (f.mass() > cap) {
    Field g(grid);
    for (std::size_t c = 0; c < n; ++c) {
      g.set(static_cast<std::int64_t>(c),
            std::floor(f.values()[c] * 0.5 * 1024.0) / 1024.0);
    }
    return g;
  }
  return f;
}

// Nested pair f1 <= f2.
std::pair<Field, Field> random_nested_pair(const GridPtr& grid, Rng& rng) {
  Field f2 = random_field(grid, rng, 0.5);
  Field f1(grid);
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    const double v = f2.values()[static_cast<std::size_t>(c)];
    const double u = std::floor(v * rng.dyadic01() * 1024.0) / 1024.0;
    f1.set(c, std::min(u, v));
  }
  return {std::move(f1), std::move(f2)};
}

// Random smooth-ish nonnegative score for bathtub-generated shapes: a few
// quadratic bumps.
std::vector<double> random_score(const GridPtr& grid, Rng& rng, double box) {
  const int bumps = 2 + static_cast<int>(rng.below(3));
  std::vector<std::vector<double>> centers;
  std::vector<double> widths, heights;
  for (int b = 0; b < bumps; ++b) {
    std::vector<double> ctr(static_cast<std::size_t>(grid->dim()));
    for (auto& x : ctr) x = rng.uniform(-box, box);
    centers.push_back(ctr);
    widths.push_back(rng.uniform(0.3 * box, box));
    heights.push_back(rng.uniform(0.5, 2.0));
  }
  std::vector<double> score(static_cast<std::size_t>(grid->cells()), 0.0);
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    const auto x = grid->center(c);
    double v = 0.0;
    for (int b = 0; b < bumps; ++b) {
      double r2 = 0.0;
      for (int a = 0; a < grid->dim(); ++a) {
        const double dx = x[static_cast<std::size_t>(a)] - centers[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
        r2 += dx * dx;
      }
      const double w = widths[static_cast<std::size_t>(b)];
      v += heights[static_cast<std::size_t>(b)] * std::max(0.0, 1.0 - r2 / (w * w));
    }
    score[static_cast<std::size_t>(c)] = v;
  }
  return score;
}

struct Check {
  bool ok = true;
  std::string details;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      details = what;
    }
  }
  void note(const std::string& s) {
    if (!details.empty()) details += "; ";
    details += s;
  }
};

using PropertyFn = std::function<void(Check&, bool full, std::uint64_t seed, int threads)>;

// ---------------------------------------------------------------------------
// Property implementations. Quick keeps every instance tiny; full enlarges
// counts and grids.

void prop_exact_sums(Check& ck, bool full, std::uint64_t seed, int /*threads*/) {
  Rng rng(seed ^ 0x11);
  const auto grid = make_centered_grid(2, 1.0, 1.0 / (full ? 32 : 16));
  Field f = random_field(grid, rng);
  const double m0 = f.mass();
  // Sum under a permuted enumeration.
  std::vector<std::int64_t> perm(static_cast<std::size_t>(grid->cells()));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  Field g(grid);
  std::vector<double> tmp(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    tmp[i] = f.values()[static_cast<std::size_t>(perm[i])];
  }
  Field h(grid, tmp);
  ck.require(h.mass() == m0, "mass changed under enumeration permutation");
  ck.require(l1_distance(f, g) == f.mass(), "l1 against zero differs from mass");
}

void prop_rasterize_convergence(Check& ck, bool full, std::uint64_t, int) {
  const double pi = std::acos(-1.0);
  std::vector<double> hs = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};
  if (full) hs.push_back(1.0 / 64);
  std::vector<double> errs;
  for (double h : hs) {
    const auto grid = make_centered_grid(2, 1.25, h);
    const Field f = rasterize(Shape::ball({0.0, 0.0}, 1.0), grid);
    const double err = std::abs(f.mass() - pi);
    errs.push_back(std::max(err, 1e-12));
    ck.require(err <= 2.0 * pi * h, "rasterize error above the perimeter*h bound");
  }
  // Least-squares slope of log err vs log h; first order expected.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double x = std::log(hs[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(hs.size());
  const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  ck.require(slope >= 0.8, "empirical rasterization order below 1 (slope " +
                               std::to_string(slope) + ")");
  ck.note("order " + std::to_string(slope));
}

void prop_support_radius(Check& ck, bool, std::uint64_t, int) {
  const auto k1 = Cost::power(1.0);
  const auto k2 = Cost::power(2.0);
  for (int dim : {1, 2}) {
    double prev = 0.0;
    for (double m : {1.0, 2.0, 4.0}) {
      const double r = support_radius(*k1, dim, m);
      ck.require(r >= prev, "support radius not monotone in m");
      prev = r;
      // Direct evaluation of the construction on sampled far points.
      const SupportRadius sr = support_radius_detail(*k1, dim, m);
      for (double rr : {sr.radius, sr.radius * 1.5, sr.radius * 3.0}) {
        ck.require(k1->kmin_sphere(rr, dim) > sr.cube_max,
                   "cost fails to clear the cube max beyond R");
      }
    }
  }
  // Spec'd values: k=|z|, d=1, m=1 -> rho1 = 3, cube max 3, R just above 3.
  const SupportRadius a = support_radius_detail(*k1, 1, 1.0);
  ck.require(std::abs(a.rho1 - 3.0) < 1e-12, "rho1(1) != 3 in d=1");
  ck.require(a.radius > 3.0 && a.radius <= 3.0 + 3.0 / 16.0 + 1e-12,
             "R(1) not just above 3 for k=|z|");
  const SupportRadius b = support_radius_detail(*k2, 1, 1.0 / 3.0);
  ck.require(std::abs(b.rho1 - 1.0) < 1e-12, "rho1(1/3) != 1 in d=1");
  ck.require(b.radius > 1.0 && b.radius < 1.5, "R not just above 1 for k=z^2");
}

void prop_hypotheses(Check& ck, bool, std::uint64_t, int) {
  ck.require(validate_hypotheses(*Cost::power(1.0), 2).all_pass(),
             "|z| should pass all hypotheses");
  const auto flat = Cost::radial_table({0.5, 1.0, 2.0}, {1.0, 1.0, 2.0});
  ck.require(!validate_hypotheses(*flat, 1).radially_increasing,
             "flat table segment should flag the monotonicity hypothesis");
  const auto aniso = Cost::anisotropic(1.0, {0.0, 1.57, 3.14, 4.71}, {1.0, 2.0, 1.5, 2.0});
  ck.require(validate_hypotheses(*aniso, 2).all_pass(),
             "positive anisotropic weight should pass");
}

void prop_primal_feasibility(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x21);
  const auto grid = make_centered_grid(2, 1.0, 1.0 / (full ? 8 : 4));
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  for (int rep = 0; rep < (full ? 5 : 3); ++rep) {
    const Field f = random_field(grid, rng);
    const Plan plan = solve_exterior(f, cost, opt);
    const auto [first, second] = plan_marginals(plan);
    for (std::int64_t c = 0; c < grid->cells(); ++c) {
      const double fv = f.values()[static_cast<std::size_t>(c)];
      ck.require(std::abs(first[c] - fv) <= 1e-9,
                 "first marginal deviates from f");
      ck.require(second[c] <= 1.0 - fv + 1e-9, "second marginal above 1 - f");
    }
    for (const auto& e : plan.entries) {
      const double len = grid->spacing() *
                         std::sqrt(static_cast<double>(grid->index_dist2(e.source, e.target)));
      ck.require(len <= plan.r_active + 1e-9, "plan entry beyond the pruning radius");
      ck.require(e.flow_units > 0, "nonpositive plan mass");
    }
  }
}

void prop_superadditivity(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x22);
  const auto grid = make_centered_grid(1, 3.0, 1.0 / (full ? 16 : 8));
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  for (int rep = 0; rep < (full ? 8 : 4); ++rep) {
    Field f1 = random_field(grid, rng, 0.4, 0.5);
    Field f2 = random_field(grid, rng, 0.4, 0.5);
    Field sum(grid);
    for (std::int64_t c = 0; c < grid->cells(); ++c) {
      sum.set(c, f1.values()[static_cast<std::size_t>(c)] +
                     f2.values()[static_cast<std::size_t>(c)]);
    }
    if (sum.mass() > 0.5 * grid->total_volume()) continue;
    const double u12 = solve_exterior(sum, cost, opt).value();
    const double u1 = solve_exterior(f1, cost, opt).value();
    const double u2 = solve_exterior(f2, cost, opt).value();
    ck.require(u12 >= u1 + u2 - 1e-9 * (1.0 + u12), "superadditivity violated");
    // Monotonicity rides along: f1 <= sum.
    ck.require(u1 <= u12 + 1e-9 * (1.0 + u12), "monotonicity violated");
  }
}

void prop_additivity_at_distance(Check& ck, bool, std::uint64_t, int threads) {
  const double h = 1.0 / 8;
  const auto cost = Cost::power(1.0);
  // Two unit-mass intervals far beyond 2R(total mass) + h.
  const double m_total = 2.0;
  const double R = support_radius(*cost, 1, m_total);
  const double gap = 2.0 * R + 6.0 * h;
  const double half_span = gap / 2 + 4.0;
  const auto grid = make_centered_grid(1, half_span, h);
  const double c1 = -gap / 2, c2 = gap / 2;
  Field f(grid);
  Field f1(grid), f2(grid);
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    const double x = grid->center(c)[0];
    if (std::abs(x - c1) < 0.5) {
      f.set(c, 1.0);
      f1.set(c, 1.0);
    }
    if (std::abs(x - c2) < 0.5) {
      f.set(c, 1.0);
      f2.set(c, 1.0);
    }
  }
  SolveOptions opt;
  opt.threads = threads;
  const Plan joint = solve_exterior(f, cost, opt);
  const Plan p1 = solve_exterior(f1, cost, opt);
  const Plan p2 = solve_exterior(f2, cost, opt);
  ck.require(joint.objective_units == p1.objective_units + p2.objective_units,
             "additivity at distance not exact");
}

void prop_lipschitz(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x23);
  const auto grid = make_centered_grid(1, 2.0, 1.0 / 8);
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  for (int rep = 0; rep < (full ? 8 : 4); ++rep) {
    const Field f1 = random_field(grid, rng, 0.5);
    const Field f2 = random_field(grid, rng, 0.5);
    const double m = std::max(f1.mass(), f2.mass());
    if (m == 0.0) continue;
    const double C = 2.0 * (1.0 + cost->kbar(support_radius(*cost, 1, m), 1));
    const double du = std::abs(solve_exterior(f1, cost, opt).value() -
                               solve_exterior(f2, cost, opt).value());
    ck.require(du <= C * l1_distance(f1, f2) + 1e-9, "Lipschitz bound violated");
  }
}

void prop_scaling(Check& ck, bool, std::uint64_t, int threads) {
  // f_lambda(x) = f(x / lambda) on the matched grid doubles every length;
  // for k = |z|^p the exact integer objective scales by 2^(d+p).
  for (double p : {1.0, 2.0}) {
    const auto cost = Cost::power(p);
    const auto grid1 = make_centered_grid(1, 3.0, 1.0 / 8);
    const auto grid2 = make_centered_grid(1, 6.0, 1.0 / 4);
    const Field f1 = rasterize(Shape::ball({0.0}, 1.0), grid1);
    const Field f2 = rasterize(Shape::ball({0.0}, 2.0), grid2);
    SolveOptions opt;
    opt.threads = threads;
    const Plan a = solve_exterior(f1, cost, opt);
    const Plan b = solve_exterior(f2, cost, opt);
    const auto factor = static_cast<__int128>(std::llround(std::pow(2.0, 1.0 + p)));
    // Costs scale by 2^p exactly on the lattice for dyadic lambda, masses
    // by 2^d through the quantum; compare the continuum values.
    const double lhs = b.value();
    const double rhs = static_cast<double>(factor) * a.value();
    ck.require(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(rhs)),
               "scaling law broken for p=" + std::to_string(p));
  }
}

void prop_marginal_monotonicity(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x24);
  const auto grid = make_centered_grid(2, 1.0, 1.0 / 5);
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  for (int rep = 0; rep < (full ? 6 : 3); ++rep) {
    const auto [f1, f2] = random_nested_pair(grid, rng);
    const Field g1 = plan_marginals(solve_exterior(f1, cost, opt)).second;
    const Field g2 = plan_marginals(solve_exterior(f2, cost, opt)).second;
    for (std::int64_t c = 0; c < grid->cells(); ++c) {
      const auto i = static_cast<std::size_t>(c);
      ck.require(f1.values()[i] + g1[c] <= f2.values()[i] + g2[c] + 1e-6,
                 "marginal monotonicity violated");
    }
  }
}

void prop_saturation_half(Check& ck, bool, std::uint64_t, int threads) {
  // f = 1/2 on a cube: the LP can keep everything in place, g = f = 1 - f.
  const auto grid = make_centered_grid(1, 1.5, 0.25);
  const auto cost = Cost::power(1.0);
  Field f(grid);
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    if (std::abs(grid->center(c)[0]) < 0.5) f.set(c, 0.5);
  }
  SolveOptions opt;
  opt.threads = threads;
  const Plan plan = solve_exterior(f, cost, opt);
  const auto rep = saturation_report(f, plan);
  ck.require(rep.fraction_classified >= 0.95, "half-density cube fails saturation");
  const auto lp = brute_lp(f, cost);
  ck.require(lp.objective_units == plan.objective_units,
             "brute LP disagrees on the half-density cube");
}

void prop_uniqueness(Check& ck, bool, std::uint64_t, int threads) {
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  {
    const auto grid = make_centered_grid(1, 2.0, 0.25);
    const Field zero(grid);
    const auto rep = second_marginal_uniqueness_check(zero, cost, 3, opt);
    ck.require(rep.max_l1_spread == 0.0, "empty field has nonzero spread");
  }
  {
    const auto grid = make_centered_grid(1, 2.5, 0.125);
    const Field ball = rasterize(Shape::ball({0.0}, 1.0), grid);
    const auto rep = second_marginal_uniqueness_check(ball, cost, 3, opt);
    ck.require(rep.values_identical, "optimal values varied across orderings");
    ck.require(rep.max_l1_spread <= 1e-6 * ball.mass(),
               "ball second marginal not unique");
  }
  {
    // Symmetric two-bump instance: plans may differ, the marginal must not.
    const auto grid = make_centered_grid(1, 1.25, 0.25);
    Field f(grid);
    for (std::int64_t c = 0; c < grid->cells(); ++c) {
      const double x = grid->center(c)[0];
      if (std::abs(std::abs(x) - 0.625) < 0.25) f.set(c, 1.0);
    }
    const auto rep = second_marginal_uniqueness_check(f, cost, 4, opt);
    ck.require(rep.values_identical, "two-bump values varied");
    ck.require(rep.max_l1_spread <= 1e-6 * f.mass(), "two-bump marginal not unique");
  }
}

void prop_dual_gap(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x31);
  const auto grid = make_centered_grid(2, 1.25, 0.25);
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  for (int rep = 0; rep < (full ? 20 : 8); ++rep) {
    const Field f = random_field(grid, rng);
    const Plan plan = solve_exterior(f, cost, opt);
    const PotentialPair pair = dual_from_plan(f, plan, threads);
    const double gap = plan.value() - pair.objective(f);
    ck.require(gap >= -1e-9 * (1.0 + plan.value()), "dual exceeded the primal");
    ck.require(std::abs(gap) <= 1e-6 * (1.0 + plan.value()), "duality gap too large");
    ck.require(pair.feasibility_violation_units() <= 0, "dual pair infeasible");
  }
}

void prop_transform_calculus(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x32);
  const auto grid = make_centered_grid(2, 1.0, 1.0 / (full ? 8 : 6));
  const auto cost = Cost::power(1.0);
  Transformer t(grid, cost, threads);
  const auto n = static_cast<std::size_t>(grid->cells());
  auto random_units = [&]() {
    std::vector<std::int64_t> u(n);
    for (auto& v : u) {
      v = to_units((rng.dyadic01() - 0.5) * 2.0);
    }
    return u;
  };
  for (int rep = 0; rep < (full ? 10 : 4); ++rep) {
    const auto a = random_units();
    const auto b = random_units();
    const auto ac = t.forward(a);
    const auto bc = t.forward(b);
    // Order reversal: a <= b => a^c >= b^c.
    std::vector<std::int64_t> mn(n), mx(n);
    for (std::size_t i = 0; i < n; ++i) {
      mn[i] = std::min(a[i], b[i]);
      mx[i] = std::max(a[i], b[i]);
    }
    const auto mnc = t.forward(mn);
    const auto mxc = t.forward(mx);
    for (std::size_t i = 0; i < n; ++i) {
      ck.require(mnc[i] >= ac[i] && mnc[i] >= bc[i], "order reversal broken");
      // Lattice identities: (a v b)^c = a^c ^ b^c exactly, and
      // (a ^ b)^c >= a^c v b^c.
      ck.require(mxc[i] == std::min(ac[i], bc[i]), "join identity not exact");
      ck.require(mnc[i] >= std::max(ac[i], bc[i]), "meet inequality broken");
    }
    // Double conjugation dominates, projection is idempotent.
    const auto acc = t.reverse(ac);
    const auto p = t.project(a);
    const auto pp = t.project(p);
    for (std::size_t i = 0; i < n; ++i) {
      ck.require(acc[i] >= a[i], "double conjugation fell below the input");
      ck.require(p[i] >= a[i], "projection fell below the input");
      ck.require(pp[i] == p[i], "projection not exactly idempotent");
    }
    // The projection never hurts the dual objective.
    const Field f = random_field(grid, rng);
    const PotentialPair before(grid, cost, a, Transformer::negative_part(t.forward(a)));
    const PotentialPair after(grid, cost, p, Transformer::negative_part(t.forward(p)));
    ck.require(after.objective(f) >= before.objective(f) - 1e-12,
               "projection decreased the dual objective");
  }
}

void prop_transform_modulus(Check& ck, bool, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x33);
  const auto grid = make_centered_grid(1, 1.0, 1.0 / 16);
  for (double p : {0.5, 1.0}) {
    const auto cost = Cost::power(p);
    const auto n = static_cast<std::size_t>(grid->cells());
    std::vector<double> xi(n);
    for (auto& v : xi) v = (rng.dyadic01() - 0.5) * 2.0;
    const auto xic = c_transform(grid, cost, xi, Transform::Forward, threads);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double dist = std::abs(grid->center(static_cast<std::int64_t>(i))[0] -
                                     grid->center(static_cast<std::int64_t>(j))[0]);
        ck.require(std::abs(xic[i] - xic[j]) <= std::pow(dist, p) + 4e-9,
                   "transform modulus exceeded for p=" + std::to_string(p));
      }
    }
  }
}

void prop_potential_monotonicity(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x34);
  const auto grid = make_centered_grid(2, 1.0, 0.25);
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  for (int rep = 0; rep < (full ? 6 : 3); ++rep) {
    const auto [f1, f2] = random_nested_pair(grid, rng);
    const PotentialPair p1 = maximal_potential(f1, cost, opt);
    const PotentialPair p2 = maximal_potential(f2, cost, opt);
    for (std::size_t i = 0; i < p1.psi_units().size(); ++i) {
      ck.require(from_units(p1.psi_units()[i]) >= from_units(p2.psi_units()[i]) - 1e-6,
                 "maximal psi not monotone under nesting");
    }
  }
}

void prop_compact_support(Check& ck, bool, std::uint64_t, int threads) {
  const auto grid = make_centered_grid(1, 6.0, 0.125);
  const auto cost = Cost::power(1.0);
  const Field ball = rasterize(Shape::ball({0.0}, 1.0), grid);
  SolveOptions opt;
  opt.threads = threads;
  const Plan plan = solve_exterior(ball, cost, opt);
  const PotentialPair pair = dual_from_plan(ball, plan, threads);
  const double r_out = 1.0 + plan.r_proof;
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    if (std::abs(grid->center(c)[0]) > r_out) {
      const auto i = static_cast<std::size_t>(c);
      ck.require(pair.phi_units()[i] == 0 && pair.psi_units()[i] == 0,
                 "potentials fail to vanish outside supp f + B_R");
    }
  }
  const double k = pair.objective(ball);
  ck.require(std::abs(k - plan.value()) <= 1e-6 * (1.0 + plan.value()),
             "canonical potentials lost the objective");
}

void prop_rearrange_basics(Check& ck, bool full, std::uint64_t seed, int) {
  Rng rng(seed ^ 0x41);
  const auto grid = make_centered_grid(2, 1.0, 1.0 / (full ? 16 : 8));
  const auto n = static_cast<std::size_t>(grid->cells());
  std::vector<double> phi(n);
  for (auto& v : phi) v = rng.dyadic01();
  const auto star = decreasing_rearrangement(grid, phi);
  // Equimeasurability, exactly, at every distinct level.
  std::vector<double> sorted_in = phi, sorted_out = star.values;
  std::sort(sorted_in.begin(), sorted_in.end());
  std::sort(sorted_out.begin(), sorted_out.end());
  ck.require(sorted_in == sorted_out, "rearrangement not equimeasurable");
  const auto star2 = decreasing_rearrangement(grid, star.values);
  ck.require(star2.values == star.values, "rearrangement not idempotent");
  // Indicators map to the discrete ball: nonzero set = first cells in
  // radial order.
  std::vector<double> ind(n, 0.0);
  for (int i = 0; i < 5; ++i) ind[rng.below(n)] = 1.0;
  const auto ind_star = decreasing_rearrangement(grid, ind);
  double prev = 2.0;
  for (double v : ind_star.profile.values) {
    ck.require(v <= prev + 1e-15, "profile not monotone");
    prev = v;
  }
  ck.require(Field(grid, ind).mass() == Field(grid, ind_star.values).mass(),
             "mass changed under rearrangement");
}

void prop_erosion(Check& ck, bool, std::uint64_t, int) {
  // Interval erosion in 1-d matches the analytic answer to one cell.
  const auto grid = make_centered_grid(1, 2.0, 0.05);
  const Field ball = rasterize(Shape::ball({0.0}, 1.0), grid);
  LevelSet omega{grid, {}};
  omega.mask.resize(ball.values().size());
  for (std::size_t i = 0; i < omega.mask.size(); ++i) {
    omega.mask[i] = ball.values()[i] > 0.5 ? 1 : 0;
  }
  const auto same = erode(omega, 0.0);
  ck.require(same.mask == omega.mask, "zero erosion changed the set");
  const auto half = erode(omega, 0.5);
  ck.require(std::abs(half.volume() - 1.0) <= 2.0 * 0.05 + 1e-12,
             "interval erosion misses the analytic volume");
  const auto gone = erode(omega, 1.5);
  ck.require(gone.count() == 0, "erosion beyond the inradius left cells");
  // Composition: erode(erode(S, r), s) contains erode(S, r + s).
  const auto grid2 = make_centered_grid(2, 1.0, 0.1);
  const Field sq = rasterize(Shape::cube({-0.7, -0.5}, 1.2), grid2);
  LevelSet om2{grid2, {}};
  om2.mask.resize(sq.values().size());
  for (std::size_t i = 0; i < om2.mask.size(); ++i) om2.mask[i] = sq.values()[i] > 0.5;
  const auto two_step = erode(erode(om2, 0.2), 0.3);
  const auto one_step = erode(om2, 0.5);
  for (std::size_t i = 0; i < om2.mask.size(); ++i) {
    ck.require(!one_step.mask[i] || two_step.mask[i],
               "erosion composition inclusion violated");
  }
}

void prop_rearrange_ctransform(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x42);
  const auto grid = make_centered_grid(2, 1.0, 1.0 / (full ? 16 : 8));
  const auto cost = Cost::power(1.0);
  const auto n = static_cast<std::size_t>(grid->cells());
  for (int rep = 0; rep < (full ? 10 : 4); ++rep) {
    std::vector<double> psi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = grid->center(static_cast<std::int64_t>(i));
      if (std::abs(x[0]) < 0.6 && std::abs(x[1]) < 0.6 && rng.uniform(0, 1) < 0.7) {
        psi[i] = -rng.dyadic01();
      }
    }
    const auto rep42 = ctransform_rearrangement_check(grid, cost, psi, 24, threads);
    ck.require(rep42.pointwise_ok, "pointwise rearrangement inequality failed");
    ck.require(rep42.volume_ok, "erosion volume bound failed");
  }
  // Radial indicator input: both sides agree within the tolerance band.
  std::vector<double> psi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = grid->center(static_cast<std::int64_t>(i));
    if (x[0] * x[0] + x[1] * x[1] < 0.25) psi[i] = -1.0;
  }
  const auto symrep = ctransform_rearrangement_check(grid, cost, psi, 24, threads);
  ck.require(symrep.pointwise_ok && symrep.volume_ok, "radial equality case failed");
}

void prop_hardy_littlewood(Check& ck, bool full, std::uint64_t seed, int) {
  Rng rng(seed ^ 0x43);
  const auto grid = make_centered_grid(2, 1.0, 1.0 / 8);
  const auto n = static_cast<std::size_t>(grid->cells());
  for (int rep = 0; rep < (full ? 100 : 20); ++rep) {
    const Field f = random_field(grid, rng, 0.5);
    std::vector<double> xi(n);
    for (auto& v : xi) v = (rng.dyadic01() - 0.5) * 2.0;
    ck.require(hardy_littlewood_check(f, xi).ok, "pairing bound violated");
  }
  // Aligned radial data meets the bound with equality.
  const Field ball = rasterize(Shape::ball({0.0, 0.0}, 0.6), grid);
  const auto rad = decreasing_rearrangement(grid, ball.values());
  const auto hl = hardy_littlewood_check(Field(grid, rad.values), rad.values);
  ck.require(std::abs(hl.lhs - hl.rhs) <= 1e-12, "aligned case not tight");
}

void prop_brunn_minkowski(Check& ck, bool, std::uint64_t, int) {
  const auto grid = make_centered_grid(2, 1.5, 1.0 / 24);
  auto mask_of = [&](const Field& f) {
    LevelSet s{grid, std::vector<std::uint8_t>(f.values().size(), 0)};
    for (std::size_t i = 0; i < s.mask.size(); ++i) s.mask[i] = f.values()[i] > 0.5;
    return s;
  };
  const double s = 0.25;
  const auto ball = mask_of(rasterize(Shape::ball({0.0, 0.0}, 1.0), grid));
  const auto ball_rep = brunn_minkowski_check(ball, s);
  ck.require(ball_rep.ok, "ball erosion bound failed");
  ck.require(std::abs(ball_rep.lhs - ball_rep.rhs) <= 2.0 * grid->spacing() + 1e-12,
             "ball erosion should be near equality");
  // A thin rectangle of the same area erodes to nothing.
  const auto thin = mask_of(rasterize(Shape::cube({-1.4, -0.18}, 2.8), grid));
  ck.require(erode(thin, 0.2).count() == 0, "thin rectangle survived erosion");
  // The ball maximizes |Omega_s| in a small equal-volume family.
  const double pi = std::acos(-1.0);
  const auto square = mask_of(rasterize(
      Shape::cube({-std::sqrt(pi) / 2, -std::sqrt(pi) / 2}, std::sqrt(pi)), grid));
  ck.require(erode(ball, s).volume() >= erode(square, s).volume() - 1e-12,
             "square out-eroded the ball");
}

void prop_bathtub(Check& ck, bool full, std::uint64_t seed, int) {
  Rng rng(seed ^ 0x51);
  {
    // Spec'd tie example: scores 3,2,2,1 at m=2 fill the first tie cell.
    const auto grid = make_grid(1, {4}, 1.0, {0.0});
    const Field f = bathtub(grid, {3, 2, 2, 1}, 2.0);
    ck.require(f.values() == std::vector<double>({1, 1, 0, 0}),
               "tie fill order broke the spec'd example");
  }
  {
    // Constant score: deterministic prefix.
    const auto grid = make_grid(1, {4}, 1.0, {0.0});
    const Field f = bathtub(grid, {1, 1, 1, 1}, 2.0);
    ck.require(f.values() == std::vector<double>({1, 1, 0, 0}),
               "plateau fill is not the prefix");
  }
  const auto grid = make_grid(1, {10}, 0.5, {0.0});
  for (int rep = 0; rep < (full ? 100 : 25); ++rep) {
    std::vector<double> xi(10);
    for (auto& v : xi) v = rng.dyadic01();
    const double m = 0.5 * static_cast<double>(1 + rng.below(9));
    const Field f = bathtub(grid, xi, m);
    ck.require(std::abs(f.mass() - m) <= 1e-12, "bathtub mass drifted");
    int fractional = 0;
    for (double v : f.values()) {
      if (v > 0.0 && v < 1.0) ++fractional;
    }
    ck.require(fractional <= 1, "more than one fractional cell");
    double pay = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      pay += xi[i] * f.values()[i] * grid->cell_volume();
    }
    // Enumeration oracle over {0, 1/2, 1} valued fields.
    const double best = exhaustive_bathtub(grid, xi, m);
    ck.require(pay >= best - 1e-12, "bathtub lost to the enumeration oracle");
  }
}

void prop_fixed_point_ball(Check& ck, bool, std::uint64_t, int threads) {
  const auto grid = make_centered_grid(1, 2.5, 0.05);
  const auto cost = Cost::power(1.0);
  const Field ball = rasterize(Shape::ball({0.0}, 1.0), grid);
  MaximizeOptions opt;
  opt.solve.threads = threads;
  const OptimizeTrace tr = maximize_shape(ball.mass(), cost, ball, opt);
  int accepted = 0;
  for (const auto& it : tr.iterates) accepted += it.accepted ? 1 : 0;
  ck.require(accepted == 1, "ball moved away from the fixed point");
  ck.require(tr.stop_reason == "fixed-point", "unexpected stop reason " + tr.stop_reason);
}

void prop_two_bumps_merge(Check& ck, bool, std::uint64_t, int threads) {
  const auto grid = make_centered_grid(1, 4.0, 0.0625);
  const auto cost = Cost::power(1.0);
  Field init(grid);
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    const double x = grid->center(c)[0];
    if (std::abs(std::abs(x) - 2.0) < 0.5) init.set(c, 1.0);
  }
  MaximizeOptions opt;
  opt.solve.threads = threads;
  opt.max_iterations = 96;
  const double m = init.mass();
  const double before = solve_exterior(init, cost, opt.solve).value();
  const OptimizeTrace tr = maximize_shape(m, cost, init, opt);
  ck.require(tr.final_value > before + 1e-6, "merging did not improve the value");
  ck.require(tr.ball_symmetric_difference <= 0.10,
             "final shape far from one interval: symdiff " +
                 std::to_string(tr.ball_symmetric_difference));
}

void prop_trace_monotone(Check& ck, bool, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x52);
  const auto grid = make_centered_grid(2, 1.0, 1.0 / 8);
  const auto cost = Cost::power(1.0);
  const double m = 0.5;
  const Field init = bathtub(grid, random_score(grid, rng, 0.6), m);
  MaximizeOptions opt;
  opt.solve.threads = threads;
  const OptimizeTrace tr = maximize_shape(m, cost, init, opt);
  double prev = -1.0;
  for (const auto& it : tr.iterates) {
    if (!it.accepted) continue;
    ck.require(it.value > prev, "accepted values not strictly increasing");
    prev = it.value;
    ck.require(std::abs(it.mass - m) <= 1e-9, "iterate mass drifted");
  }
  // Final iterate satisfies the bathtub fixed-point condition up to ties.
  const PotentialPair pair = maximal_potential(tr.final_f, cost, opt.solve);
  std::vector<double> xi(pair.phi_units().size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    xi[i] = from_units(pair.phi_units()[i] - pair.psi_units()[i]);
  }
  const Field again = bathtub(grid, xi, m);
  const double t = bathtub_threshold(grid, xi, m);
  double mismatch = 0.0;
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    const auto i = static_cast<std::size_t>(c);
    if (xi[i] != t) {
      mismatch += std::abs(again.values()[i] - tr.final_f.values()[i]);
    }
  }
  ck.require(mismatch * grid->cell_volume() <= 1e-9,
             "fixed point differs away from the tie plateau");
}

void prop_energy_curve(Check& ck, bool, std::uint64_t, int threads) {
  const auto grid = make_centered_grid(1, 8.0, 0.125);
  const auto cost = Cost::power(1.0);
  MaximizeOptions opt;
  opt.solve.threads = threads;
  const EnergyCurve curve = energy_curve({1.0, 2.0, 3.0, 4.0}, cost, grid, opt);
  ck.require(curve.e_monotone, "energy per mass not increasing");
  ck.require(curve.min_increase_margin > 1e-7, "monotonicity margin too small");
  ck.require(curve.superadditive, "superadditivity of the curve failed");
  // d=1, k=|z|: E(m) = m^2/2 analytically.
  for (const auto& pt : curve.points) {
    ck.require(std::abs(pt.energy - 0.5 * pt.m * pt.m) <= 0.05 * pt.energy,
               "curve point far from the analytic value");
  }
}

void prop_annulus_1d(Check& ck, bool, std::uint64_t, int threads) {
  const auto grid = make_centered_grid(1, 2.5, 1.0 / 32);
  const auto cost = Cost::power(1.0);
  const Field ball = rasterize(Shape::ball({0.0}, 1.0), grid);
  SolveOptions opt;
  opt.threads = threads;
  const Plan plan = solve_exterior(ball, cost, opt);
  const Field g = plan_marginals(plan).second;
  const Field annulus = rasterize(Shape::annulus({0.0}, 1.0, 2.0), grid);
  ck.require(l1_distance(g, annulus) <= 0.05 * ball.mass(),
             "1-d destination differs from the annulus");
  const double v = plan.value();
  ck.require(std::abs(v - 2.0) <= 4.0 * grid->spacing(), "1-d ball value far from 2");
}

void prop_monotone_potential_ball(Check& ck, bool, std::uint64_t, int threads) {
  const auto grid = make_centered_grid(1, 3.0, 1.0 / 16);
  const auto cost = Cost::power(1.0);
  const Field ball = rasterize(Shape::ball({0.0}, 1.0), grid);
  SolveOptions opt;
  opt.threads = threads;
  const PotentialPair pair = maximal_potential(ball, cost, opt);
  const auto phi = pair.phi();
  // Radially non-increasing within a one-cell tolerance, strictly
  // decreasing strictly inside the ball.
  const double h = grid->spacing();
  for (double r = 0.0; r + 2.5 * h < 3.0; r += h) {
    double inner = -1e300, outer = 1e300;
    for (std::int64_t c = 0; c < grid->cells(); ++c) {
      const double rr = std::abs(grid->center(c)[0]);
      if (std::abs(rr - r) <= 0.5 * h) inner = std::max(inner, phi[static_cast<std::size_t>(c)]);
      if (std::abs(rr - (r + 2.0 * h)) <= 0.5 * h) {
        outer = std::min(outer, phi[static_cast<std::size_t>(c)]);
      }
    }
    if (inner == -1e300 || outer == 1e300) continue;
    ck.require(outer <= inner + 1e-9, "phi increased with radius");
    if (r + 2.5 * h < 1.0) {
      ck.require(outer < inner, "phi not strictly decreasing inside the ball");
    }
  }
}

void prop_concentration(Check& ck, bool, std::uint64_t, int threads) {
  const auto grid = make_centered_grid(1, 3.0, 0.125);
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  const Field ball = rasterize(Shape::ball({0.0}, 1.0), grid);
  const auto hit = concentration_cube(ball, ball.mass(), cost, opt);
  ck.require(hit.found, "no concentration cube for the ball");
  // Uniformly spread density at 1/4 never half-fills a cube.
  Field thin(grid);
  for (std::int64_t c = 0; c < grid->cells(); ++c) thin.set(c, 0.25);
  const auto miss = concentration_cube(thin, thin.mass(), cost, opt);
  ck.require(!miss.found, "quarter-density field should not concentrate");
  ck.require(miss.upsilon < miss.half_energy,
             "contrapositive failed: Upsilon >= E/2 without a cube");
}

void prop_tightness(Check& ck, bool, std::uint64_t, int threads) {
  const auto cost = Cost::power(1.0);
  SolveOptions opt;
  opt.threads = threads;
  {
    const auto grid = make_centered_grid(1, 3.0, 0.125);
    const Field ball = rasterize(Shape::ball({0.0}, 1.0), grid);
    const auto rep = tightness_report(ball, ball.mass(), cost, opt);
    ck.require(rep.holds, "tightness bound failed on the maximizer");
    ck.require(std::abs(rep.epsilon) <= 1e-6 * (1.0 + rep.energy),
               "maximizer has nonzero suboptimality");
  }
  {
    // Two distant equal balls: large suboptimality, bound still holds.
    const auto grid = make_centered_grid(1, 24.0, 0.125);
    Field f(grid);
    for (std::int64_t c = 0; c < grid->cells(); ++c) {
      const double x = grid->center(c)[0];
      if (std::abs(std::abs(x) - 20.0) < 0.5) f.set(c, 1.0);
    }
    const auto rep = tightness_report(f, f.mass(), cost, opt);
    ck.require(rep.epsilon > 0.1, "distant pair should be clearly suboptimal");
    ck.require(rep.holds, "tightness bound failed on the distant pair");
  }
}

void prop_oracle_agreement(Check& ck, bool full, std::uint64_t seed, int threads) {
  Rng rng(seed ^ 0x61);
  SolveOptions opt;
  opt.threads = threads;
  const int reps = full ? 60 : 25;
  for (int rep = 0; rep < reps; ++rep) {
    GridPtr grid;
    if (rep % 2 == 0) {
      const auto n = static_cast<std::int64_t>(8 + rng.below(full ? 93 : 40));
      grid = make_grid(1, {n}, 0.25, {0.0});
    } else {
      const auto n = static_cast<std::int64_t>(3 + rng.below(full ? 8 : 4));
      grid = make_grid(2, {n, n}, 0.25, {0.0, 0.0});
    }
    const auto cost = rep % 3 == 0 ? Cost::power(2.0) : Cost::power(1.0);
    const Field f = random_field(grid, rng, 0.5);
    const Plan plan = solve_exterior(f, cost, opt);
    const auto lp = brute_lp(f, cost);
    ck.require(lp.objective_units == plan.objective_units,
               "oracle and solver objectives differ");
  }
}

void prop_monotone_1d(Check& ck, bool, std::uint64_t, int threads) {
  const auto k1 = Cost::power(1.0);
  const auto k2 = Cost::power(2.0);
  ck.require(std::abs(monotone_1d(-1.0, 1.0, 1.0, k1) - 2.0) <= 1e-9,
             "interval value under |z| is not 2");
  ck.require(std::abs(monotone_1d(-1.0, 1.0, 1.0, k2) - 2.0) <= 1e-9,
             "interval value under z^2 is not 2");
  ck.require(monotone_1d(-1.0, 1.0, 0.5, k1) == 0.0, "half density should ride free");
  // Cross-check a strictly fractional level against the dense LP.
  const auto grid = make_centered_grid(1, 2.0, 1.0 / 32);
  Field f(grid);
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    if (std::abs(grid->center(c)[0]) < 1.0) f.set(c, 0.75);
  }
  SolveOptions opt;
  opt.threads = threads;
  const double lp = solve_exterior(f, k1, opt).value();
  const double oracle = monotone_1d(-1.0, 1.0, 0.75, k1);
  ck.require(std::abs(lp - oracle) <= 8.0 * grid->spacing(),
             "monotone oracle far from the LP at level 3/4");
  bool refused = false;
  try {
    monotone_1d(-1.0, 1.0, 1.0, Cost::power(0.5));
  } catch (const InvalidArgument&) {
    refused = true;
  }
  ck.require(refused, "concave cost was not refused");
}

void prop_determinism(Check& ck, bool, std::uint64_t seed, int threads) {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = ExperimentConfig::parse_text(
      "[grid]\ndim = 1\nextent = 64\nspacing = 0.0625\n"
      "[cost]\nkind = power\np = 1\n"
      "[field]\nshape = ball(0;1)\n"
      "[task]\nname = solve\nseed = " +
      std::to_string(seed) + "\nthreads = " + std::to_string(threads) + "\n");
  const fs::path base = fs::temp_directory_path() / "extot_verify_det";
  std::error_code ec;
  fs::remove_all(base, ec);
  auto read_all = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const RunResult r1 = run(cfg, (base / "a").string());
  const RunResult r2 = run(cfg, (base / "b").string());
  ck.require(r1.exit_code == 0 && r2.exit_code == 0, "solve run failed");
  for (const char* name : {"summary.json", "f.csv", "g.csv", "plan.csv"}) {
    ck.require(read_all(base / "a" / name) == read_all(base / "b" / name),
               std::string("artifact differs across runs: ") + name);
  }
  fs::remove_all(base, ec);
}

}  // namespace

VerifyReport verify_suite(const std::string& level, std::uint64_t seed, int threads) {
  const bool full = level == "full";
  if (!full && level != "quick") {
    throw InvalidArgument("verify level must be 'quick' or 'full'");
  }
  if (threads <= 0) threads = default_threads();

  const std::vector<std::pair<std::string, PropertyFn>> props = {
      {"domain.exact_sums", prop_exact_sums},
      {"domain.rasterize_convergence", prop_rasterize_convergence},
      {"domain.support_radius", prop_support_radius},
      {"domain.hypotheses", prop_hypotheses},
      {"primal.feasibility", prop_primal_feasibility},
      {"primal.superadditivity", prop_superadditivity},
      {"primal.additivity_at_distance", prop_additivity_at_distance},
      {"primal.lipschitz", prop_lipschitz},
      {"primal.scaling", prop_scaling},
      {"primal.marginal_monotonicity", prop_marginal_monotonicity},
      {"primal.saturation_half_density", prop_saturation_half},
      {"primal.second_marginal_uniqueness", prop_uniqueness},
      {"dual.gap_certificate", prop_dual_gap},
      {"dual.transform_calculus", prop_transform_calculus},
      {"dual.transform_modulus", prop_transform_modulus},
      {"dual.potential_monotonicity", prop_potential_monotonicity},
      {"dual.compact_support", prop_compact_support},
      {"rearrange.equimeasurable", prop_rearrange_basics},
      {"rearrange.erosion", prop_erosion},
      {"rearrange.ctransform_inequality", prop_rearrange_ctransform},
      {"rearrange.pairing_bound", prop_hardy_littlewood},
      {"rearrange.erosion_bound", prop_brunn_minkowski},
      {"optimize.bathtub", prop_bathtub},
      {"optimize.fixed_point_ball", prop_fixed_point_ball},
      {"optimize.two_bumps_merge", prop_two_bumps_merge},
      {"optimize.trace_monotone", prop_trace_monotone},
      {"optimize.energy_curve", prop_energy_curve},
      {"optimize.annulus_1d", prop_annulus_1d},
      {"optimize.monotone_potential_ball", prop_monotone_potential_ball},
      {"optimize.concentration", prop_concentration},
      {"optimize.tightness", prop_tightness},
      {"oracle.lp_agreement", prop_oracle_agreement},
      {"oracle.monotone_1d", prop_monotone_1d},
      {"cli.determinism", prop_determinism},
  };

  VerifyReport report;
  for (const auto& [id, fn] : props) {
    Check ck;
    try {
      fn(ck, full, seed, threads);
    } catch (const std::exception& e) {
      ck.ok = false;
      ck.details = std::string("exception: ") + e.what();
    }
    report.properties.push_back({id, ck.ok, ck.details});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Task runner.

namespace {

double elapsed_ms(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InternalError("cannot write " + path.string());
  out << text;
}

json field_stats(const Field& f) {
  return json{{"mass", f.mass()}, {"cells", f.grid()->cells()}};
}

}  // namespace

RunResult run(const ExperimentConfig& config, const std::string& out_dir) {
  namespace fs = std::filesystem;
  RunResult result;
  const auto t0 = std::chrono::steady_clock::now();
  json summary, timing;
  int contract_failures = 0;

  fs::create_directories(out_dir);
  const std::string task = config.task();
  summary["task"] = task;
  summary["seed"] = config.seed();

  SolveOptions sopt;
  sopt.threads = config.threads();
  sopt.quantum_bits = static_cast<int>(config.get_int_or("task", "quantum_bits", 20));

  try {
    if (task == "solve") {
      const GridPtr grid = config.build_grid();
      const CostPtr cost = config.build_cost();
      const Field f = config.build_field(grid);
      const Plan plan = solve_exterior(f, cost, sopt);
      const PotentialPair pair = dual_from_plan(f, plan, sopt.threads);
      const double gap = plan.value() - pair.objective(f);
      const auto sat = saturation_report(f, plan);
      summary["field"] = field_stats(f);
      summary["value"] = plan.value();
      summary["gap"] = gap;
      summary["saturation_fraction"] = sat.fraction_classified;
      summary["violations"] = sat.violations;
      summary["radius"] = {{"proof", plan.r_proof},
                           {"active", plan.r_active},
                           {"max_arc", plan.max_arc_length},
                           {"capped", plan.r_capped}};
      if (std::abs(gap) > 1e-6 * (1.0 + plan.value())) ++contract_failures;
      {
        std::ofstream os(fs::path(out_dir) / "f.csv", std::ios::binary);
        write_field_csv(os, f);
      }
      {
        std::ofstream os(fs::path(out_dir) / "g.csv", std::ios::binary);
        write_field_csv(os, plan_marginals(plan).second);
      }
      {
        std::ofstream os(fs::path(out_dir) / "plan.csv", std::ios::binary);
        write_plan_csv(os, plan);
      }
    } else if (task == "dual") {
      const GridPtr grid = config.build_grid();
      const CostPtr cost = config.build_cost();
      const Field f = config.build_field(grid);
      const Plan plan = solve_exterior(f, cost, sopt);
      const PotentialPair pair = maximal_potential(f, plan, sopt.threads);
      const auto slack = slackness_report(f, plan, pair);
      const double gap = plan.value() - pair.objective(f);
      summary["value"] = plan.value();
      summary["gap"] = gap;
      summary["slackness"] = {
          {"negative_cells", slack.negative_cells},
          {"positive_cells", slack.positive_cells},
          {"negative_violation_fraction", slack.negative_violation_fraction},
          {"positive_violation_fraction", slack.positive_violation_fraction},
          {"tol", slack.tol}};
      if (std::abs(gap) > 1e-6 * (1.0 + plan.value())) ++contract_failures;
      if (slack.negative_violation_fraction > 0.05 ||
          slack.positive_violation_fraction > 0.05) {
        ++contract_failures;
      }
      std::ofstream os(fs::path(out_dir) / "potentials.csv", std::ios::binary);
      os << "cell,phi,psi\n";
      char buf[96];
      const auto phi = pair.phi();
      const auto psi = pair.psi();
      for (std::size_t i = 0; i < phi.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g", i, phi[i], psi[i]);
        os << buf << '\n';
      }
    } else if (task == "rearr") {
      const GridPtr grid = config.build_grid();
      const CostPtr cost = config.build_cost();
      const Field f = config.build_field(grid);
      std::vector<double> psi(f.values().size());
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = -f.values()[i];
      const auto chk = ctransform_rearrangement_check(grid, cost, psi, 32, sopt.threads);
      const auto star = increasing_rearrangement(grid, psi);
      summary["pointwise_ok"] = chk.pointwise_ok;
      summary["worst_pointwise"] = chk.worst_pointwise;
      summary["volume_ok"] = chk.volume_ok;
      summary["worst_volume_excess"] = chk.worst_volume_excess;
      summary["thresholds"] = chk.thresholds_checked;
      if (!chk.pointwise_ok || !chk.volume_ok) ++contract_failures;
      std::ofstream os(fs::path(out_dir) / "profile.csv", std::ios::binary);
      write_profile_csv(os, star.profile);
    } else if (task == "optimize") {
      const GridPtr grid = config.build_grid();
      const CostPtr cost = config.build_cost();
      const double m = config.get_double("task", "m");
      MaximizeOptions mopt;
      mopt.solve = sopt;
      mopt.max_iterations =
          static_cast<int>(config.get_int_or("task", "max_iterations", 64));
      Field init(grid);
      const std::string init_kind = config.get_or("task", "init", "ball");
      if (init_kind == "ball") {
        std::vector<double> score(static_cast<std::size_t>(grid->cells()));
        for (std::int64_t c = 0; c < grid->cells(); ++c) {
          double r2 = 0.0;
          for (double x : grid->center(c)) r2 += x * x;
          score[static_cast<std::size_t>(c)] = grid->diameter() + 1.0 - std::sqrt(r2);
        }
        init = bathtub(grid, score, m);
      } else if (init_kind == "random") {
        Rng rng(config.seed());
        init = bathtub(grid, random_score(grid, rng, 0.45 * grid->diameter()), m);
      } else {
        const Field ind = rasterize(Shape::parse(init_kind, grid->dim()), grid);
        init = bathtub(grid, ind.values(), m);
      }
      const OptimizeTrace tr = maximize_shape(m, cost, init, mopt);
      summary["final_value"] = tr.final_value;
      summary["stop_reason"] = tr.stop_reason;
      summary["iterations"] = tr.iterates.size();
      summary["ball_symmetric_difference"] = tr.ball_symmetric_difference;
      summary["ball_center"] = tr.ball_center;
      summary["ball_radius"] = tr.ball_radius;
      json its = json::array();
      for (const auto& it : tr.iterates) {
        its.push_back({{"value", it.value},
                       {"mass", it.mass},
                       {"accepted", it.accepted},
                       {"phi_max", it.phi_max},
                       {"psi_min", it.psi_min}});
      }
      summary["trace"] = its;
      std::ofstream os(fs::path(out_dir) / "final_f.csv", std::ios::binary);
      write_field_csv(os, tr.final_f);
    } else if (task == "curve") {
      const GridPtr grid = config.build_grid();
      const CostPtr cost = config.build_cost();
      const auto ms = config.get_doubles("task", "ms");
      MaximizeOptions mopt;
      mopt.solve = sopt;
      const EnergyCurve curve = energy_curve(ms, cost, grid, mopt);
      summary["e_monotone"] = curve.e_monotone;
      summary["superadditive"] = curve.superadditive;
      summary["min_increase_margin"] = curve.min_increase_margin;
      summary["min_split_margin"] = curve.min_split_margin;
      if (!curve.e_monotone || !curve.superadditive) ++contract_failures;
      std::ofstream os(fs::path(out_dir) / "curve.csv", std::ios::binary);
      os << "m,E,e,iterations\n";
      char buf[128];
      for (const auto& pt : curve.points) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%d", pt.m, pt.energy,
                      pt.energy_per_mass, pt.iterations);
        os << buf << '\n';
      }
    } else if (task == "verify") {
      const std::string level = config.get_or("task", "level", "quick");
      const VerifyReport rep = verify_suite(level, config.seed(), sopt.threads);
      json props = json::array();
      for (const auto& p : rep.properties) {
        props.push_back({{"id", p.id}, {"pass", p.pass}, {"details", p.details}});
        if (!p.pass) ++contract_failures;
      }
      summary["level"] = level;
      summary["properties"] = props;
      summary["all_pass"] = rep.all_pass();
    } else if (task == "oracle") {
      const GridPtr grid = config.build_grid();
      const CostPtr cost = config.build_cost();
      const Field f = config.build_field(grid);
      const auto lp = brute_lp(f, cost, sopt.quantum_bits);
      const Plan plan = solve_exterior(f, cost, sopt);
      summary["oracle_value"] = lp.value;
      summary["solver_value"] = plan.value();
      summary["identical"] = lp.objective_units == plan.objective_units;
      if (lp.objective_units != plan.objective_units) ++contract_failures;
      if (grid->dim() == 1 && config.has("task", "interval")) {
        const auto iv = config.get_doubles("task", "interval");
        if (iv.size() != 3) throw ParseError("[task] interval: expected a,b,level");
        summary["monotone_1d"] = monotone_1d(iv[0], iv[1], iv[2], cost);
      }
    } else {
      throw ParseError("unknown task '" + task + "'");
    }
  } catch (const ParseError& e) {
    result.exit_code = 2;
    result.message = e.what();
    summary["error"] = e.what();
    write_text(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
    return result;
  } catch (const std::exception& e) {
    result.exit_code = 1;
    result.message = e.what();
    summary["error"] = e.what();
    write_text(fs::path(out_dir) / "summary.json", summary.dump(2) + "\n");
    return result;
  }

  summary["ok"] = contract_failures == 0;
  result.exit_code = contract_failures == 0 ? 0 : 1;
  result.summary_path = (fs::path(out_dir) / "summary.json").string();
  write_text(result.summary_path, summary.dump(2) + "\n");
  timing["total_ms"] = elapsed_ms(t0);
  write_text(fs::path(out_dir) / "timing.json", timing.dump(2) + "\n");
  return result;
}

}  // namespace extot
