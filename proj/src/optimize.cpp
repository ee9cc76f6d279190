#include "extot/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <unordered_set>

#include "extot/quadrature.hpp"

namespace extot {

namespace {

std::uint64_t field_hash(const Field& f) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : f.values()) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof bits);
    h = (h ^ bits) * 1099511628211ULL;
  }
  return h;
}

// Quasi-ball about the origin with mass exactly m: bathtub applied to a
// radially decreasing score.
Field exact_mass_ball(const GridPtr& grid, double m) {
  const auto n = static_cast<std::size_t>(grid->cells());
  std::vector<double> score(n);
  const double far = grid->diameter() + 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (double x : grid->center(static_cast<std::int64_t>(c))) s += x * x;
    score[c] = far - std::sqrt(s);
  }
  return bathtub(grid, score, m);
}

}  // namespace

double bathtub_threshold(const GridPtr& grid, const std::vector<double>& xi, double m) {
  if (static_cast<std::int64_t>(xi.size()) != grid->cells()) {
    throw InvalidArgument("bathtub input size mismatch");
  }
  if (!(m > 0.0)) throw InvalidArgument("bathtub needs m > 0");
  if (m > grid->total_volume() * (1.0 + 1e-12)) {
    throw InvalidArgument("bathtub mass exceeds the grid volume");
  }
  for (double v : xi) {
    if (!(v >= 0.0)) throw InvalidArgument("bathtub score must be >= 0");
  }
  const double hv = grid->cell_volume();
  std::vector<double> sorted = xi;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  // t = inf { s >= 0 : |{xi > s}| <= m }. Walk distinct values downward
  // while the strict superlevel volume stays within m.
  double t = sorted.front();
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    // Cells strictly above the *next* candidate value are the first j.
    const double next = j < sorted.size() ? sorted[j] : 0.0;
    if (static_cast<double>(j) * hv <= m) {
      t = next;  // can lower the threshold past this plateau
      if (j == sorted.size()) break;
      i = j;
    } else {
      t = sorted[i];  // lowering further would overfill
      break;
    }
  }
  return std::max(t, 0.0);
}

Field bathtub(const GridPtr& grid, const std::vector<double>& xi, double m) {
  const double t = bathtub_threshold(grid, xi, m);
  const double hv = grid->cell_volume();
  Field f(grid);
  std::int64_t full = 0;
  for (std::size_t c = 0; c < xi.size(); ++c) {
    if (xi[c] > t) {
      f.set(static_cast<std::int64_t>(c), 1.0);
      ++full;
    }
  }
  double remaining = m - static_cast<double>(full) * hv;
  if (remaining < -1e-9 * (1.0 + m)) {
    throw InternalError("bathtub threshold overfilled the mass budget");
  }
  // Plateau fill in cell-index order, one fractional cell at most.
  for (std::size_t c = 0; c < xi.size() && remaining > 0.0; ++c) {
    if (xi[c] != t) continue;
    const double take = std::min(remaining, hv);
    f.set(static_cast<std::int64_t>(c), take / hv);
    remaining -= take;
    if (take < hv) break;
  }
  if (remaining > 1e-9 * (1.0 + m)) {
    throw InvalidArgument("bathtub plateau too small to reach the mass");
  }
  return f;
}

double ball_symmetric_difference(const Field& f, double m,
                                 std::vector<double>* center_out,
                                 double* radius_out) {
  const GridPtr& grid = f.grid();
  const int d = grid->dim();
  std::vector<double> center(static_cast<std::size_t>(d), 0.0);
  double total = 0.0;
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    const double w = f.values()[static_cast<std::size_t>(c)];
    if (w == 0.0) continue;
    const auto x = grid->center(c);
    for (int a = 0; a < d; ++a) center[static_cast<std::size_t>(a)] += w * x[static_cast<std::size_t>(a)];
    total += w;
  }
  if (total <= 0.0) throw InvalidArgument("empty density has no best-fit ball");
  for (double& v : center) v /= total;
  const double radius = std::pow(m / unit_ball_volume(d), 1.0 / d);

  double diff = 0.0;
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    const auto x = grid->center(c);
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double dx = x[static_cast<std::size_t>(a)] - center[static_cast<std::size_t>(a)];
      r2 += dx * dx;
    }
    const double ball = r2 < radius * radius ? 1.0 : 0.0;
    diff += std::abs(f.values()[static_cast<std::size_t>(c)] - ball);
  }
  diff *= grid->cell_volume();
  if (center_out) *center_out = center;
  if (radius_out) *radius_out = radius;
  return diff / m;
}

OptimizeTrace maximize_shape(double m, const CostPtr& c, const Field& init,
                             const MaximizeOptions& opt) {
  if (std::abs(init.mass() - m) > 1e-6 * (1.0 + m)) {
    throw InvalidArgument("initial density mass differs from m");
  }
  Field f = init;
  Plan plan = solve_exterior(f, c, opt.solve);
  double value = plan.value();
  PotentialPair pair = maximal_potential(f, plan, opt.solve.threads);

  OptimizeTrace trace;
  trace.final_f = f;
  std::unordered_set<std::uint64_t> seen{field_hash(f)};

  auto summarize = [&](const Field& fld, const PotentialPair* pp, double v,
                       bool accepted) {
    OptimizeIterate it;
    it.value = v;
    it.mass = fld.mass();
    if (pp) {
      std::int64_t pmax = 0, pmin = 0;
      for (std::int64_t u : pp->phi_units()) pmax = std::max(pmax, u);
      for (std::int64_t u : pp->psi_units()) pmin = std::min(pmin, u);
      it.phi_max = from_units(pmax);
      it.psi_min = from_units(pmin);
    }
    it.accepted = accepted;
    trace.iterates.push_back(it);
  };
  summarize(f, &pair, value, true);

  trace.stop_reason = "max-iterations";
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    std::vector<double> xi(pair.phi_units().size());
    for (std::size_t i = 0; i < xi.size(); ++i) {
      xi[i] = from_units(pair.phi_units()[i] - pair.psi_units()[i]);
    }
    Field candidate = bathtub(f.grid(), xi, m);
    Plan cand_plan = solve_exterior(candidate, c, opt.solve);
    const double cand_value = cand_plan.value();
    const bool better = cand_value > value + opt.tol_scale * (1.0 + std::abs(value));
    if (!better) {
      summarize(candidate, nullptr, cand_value, false);
      trace.stop_reason = "fixed-point";
      break;
    }
    pair = maximal_potential(candidate, cand_plan, opt.solve.threads);
    summarize(candidate, &pair, cand_value, true);
    const std::uint64_t hash = field_hash(candidate);
    if (!seen.insert(hash).second) {
      trace.stop_reason = "cycle";
      break;
    }
    f = std::move(candidate);
    plan = std::move(cand_plan);
    value = cand_value;
  }

  trace.final_f = f;
  trace.final_value = value;
  trace.ball_symmetric_difference =
      ball_symmetric_difference(f, m, &trace.ball_center, &trace.ball_radius);
  return trace;
}

EnergyCurve energy_curve(const std::vector<double>& ms, const CostPtr& c,
                         const GridPtr& grid, const MaximizeOptions& opt) {
  EnergyCurve curve;
  double prev_m = 0.0;
  for (double m : ms) {
    if (m <= prev_m) throw InvalidArgument("energy curve needs increasing masses");
    prev_m = m;
    const Field ball = exact_mass_ball(grid, m);
    OptimizeTrace tr = maximize_shape(m, c, ball, opt);
    EnergyPoint pt;
    pt.m = m;
    pt.energy = tr.final_value;
    pt.energy_per_mass = tr.final_value / m;
    pt.iterations = static_cast<int>(tr.iterates.size());
    curve.points.push_back(pt);
  }
  curve.min_increase_margin = 1e300;
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    const double margin =
        curve.points[i + 1].energy_per_mass - curve.points[i].energy_per_mass;
    curve.min_increase_margin = std::min(curve.min_increase_margin, margin);
    if (margin <= 0.0) curve.e_monotone = false;
  }
  curve.min_split_margin = 1e300;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    for (std::size_t j = i; j < curve.points.size(); ++j) {
      const double sum = curve.points[i].m + curve.points[j].m;
      for (const auto& pk : curve.points) {
        if (std::abs(pk.m - sum) <= 1e-9 * (1.0 + sum)) {
          const double margin =
              pk.energy - curve.points[i].energy - curve.points[j].energy;
          curve.min_split_margin = std::min(curve.min_split_margin, margin);
          if (margin <= 0.0) curve.superadditive = false;
        }
      }
    }
  }
  if (curve.points.size() < 2) curve.min_increase_margin = 0.0;
  if (curve.min_split_margin == 1e300) curve.min_split_margin = 0.0;
  return curve;
}

ConcentrationResult concentration_cube(const Field& f, double m, const CostPtr& c,
                                       const SolveOptions& opt) {
  const GridPtr& grid = f.grid();
  const int d = grid->dim();
  ConcentrationResult res;

  const Field ball = exact_mass_ball(grid, m);
  res.half_energy = 0.5 * solve_exterior(ball, c, opt).value();
  const double level = 2.0 * res.half_energy / (4.0 * m);  // E/(4m)

  // r0(m): largest sampled r with max_{|z| <= sqrt(d) r} k(z) <= E/(4m).
  const double sqd = std::sqrt(static_cast<double>(d));
  const double step = grid->spacing() / 4.0;
  double r0 = 0.0;
  for (double r = step; r <= grid->diameter(); r += step) {
    if (c->kbar(sqd * r, d) <= level) {
      r0 = r;
    } else {
      break;
    }
  }
  if (r0 == 0.0) r0 = step;
  res.side = r0;
  res.required = 0.5 * std::pow(r0, d);

  // Cube partition anchored at the grid box corner.
  std::vector<double> corner(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    corner[static_cast<std::size_t>(a)] =
        grid->origin()[static_cast<std::size_t>(a)] - 0.5 * grid->spacing();
  }
  std::map<std::vector<std::int64_t>, double> cube_mass;
  for (std::int64_t cell = 0; cell < grid->cells(); ++cell) {
    const double w = f.values()[static_cast<std::size_t>(cell)];
    if (w == 0.0) continue;
    const auto x = grid->center(cell);
    std::vector<std::int64_t> id(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      id[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(
          std::floor((x[static_cast<std::size_t>(a)] - corner[static_cast<std::size_t>(a)]) / r0));
    }
    cube_mass[id] += w * grid->cell_volume();
  }
  for (const auto& [id, mass_q] : cube_mass) {
    if (mass_q >= res.required - 1e-12) {
      res.found = true;
      res.mass_in_cube = mass_q;
      res.cube_corner.resize(static_cast<std::size_t>(d));
      for (int a = 0; a < d; ++a) {
        res.cube_corner[static_cast<std::size_t>(a)] =
            corner[static_cast<std::size_t>(a)] +
            r0 * static_cast<double>(id[static_cast<std::size_t>(a)]);
      }
      break;
    }
  }
  if (!res.found) {
    res.upsilon = solve_exterior(f, c, opt).value();
  }
  return res;
}

TightnessReport tightness_report(const Field& f, double m, const CostPtr& c,
                                 const SolveOptions& opt) {
  if (std::abs(f.mass() - m) > 1e-6 * (1.0 + m)) {
    throw InvalidArgument("tightness report requires mass(f) = m");
  }
  const GridPtr& grid = f.grid();
  const int d = grid->dim();
  TightnessReport rep;

  const Field ball = exact_mass_ball(grid, m);
  rep.energy = solve_exterior(ball, c, opt).value();
  const double ups = solve_exterior(f, c, opt).value();
  rep.epsilon = rep.energy - ups;
  rep.bound = 2.0 * m / rep.energy * std::max(rep.epsilon, 0.0);

  // Proof-faithful radius: diameter bound (4R + 2 sqrt(d) r0) (N + 1) with
  // r0 from the concentration lemma and N the chain-length cap.
  const double R = support_radius(*c, d, m);
  const double level = rep.energy / (4.0 * m);
  const double sqd = std::sqrt(static_cast<double>(d));
  const double step = grid->spacing() / 4.0;
  double r0 = step;
  for (double r = step; r <= grid->diameter() + R; r += step) {
    if (c->kbar(sqd * r, d) <= level) {
      r0 = r;
    } else {
      break;
    }
  }
  const double n_chain = std::floor(8.0 * m / std::pow(r0, d));
  rep.r_star = (4.0 * R + 2.0 * sqd * r0) * (n_chain + 1.0);

  // Candidate centers: mass centroid and the densest cell.
  std::vector<std::vector<double>> candidates;
  {
    std::vector<double> centroid(static_cast<std::size_t>(d), 0.0);
    double total = 0.0;
    std::int64_t densest = 0;
    for (std::int64_t cell = 0; cell < grid->cells(); ++cell) {
      const double w = f.values()[static_cast<std::size_t>(cell)];
      if (w > f.values()[static_cast<std::size_t>(densest)]) densest = cell;
      if (w == 0.0) continue;
      const auto x = grid->center(cell);
      for (int a = 0; a < d; ++a) centroid[static_cast<std::size_t>(a)] += w * x[static_cast<std::size_t>(a)];
      total += w;
    }
    if (total > 0.0) {
      for (double& v : centroid) v /= total;
      candidates.push_back(centroid);
    }
    candidates.push_back(grid->center(densest));
  }

  auto outside_mass = [&](const std::vector<double>& ctr, double radius) {
    double out = 0.0;
    for (std::int64_t cell = 0; cell < grid->cells(); ++cell) {
      const double w = f.values()[static_cast<std::size_t>(cell)];
      if (w == 0.0) continue;
      const auto x = grid->center(cell);
      double r2 = 0.0;
      for (int a = 0; a < d; ++a) {
        const double dx = x[static_cast<std::size_t>(a)] - ctr[static_cast<std::size_t>(a)];
        r2 += dx * dx;
      }
      if (r2 > radius * radius) out += w;
    }
    return out * grid->cell_volume();
  };

  rep.outside_mass = 1e300;
  for (const auto& ctr : candidates) {
    const double out = outside_mass(ctr, rep.r_star);
    if (out < rep.outside_mass) {
      rep.outside_mass = out;
      rep.center = ctr;
    }
  }
  rep.holds = rep.outside_mass <= rep.bound + 1e-12;

  // Empirical radius: smallest radius around the chosen center meeting the
  // same bound.
  std::vector<std::pair<double, double>> by_dist;  // (distance, mass)
  for (std::int64_t cell = 0; cell < grid->cells(); ++cell) {
    const double w = f.values()[static_cast<std::size_t>(cell)];
    if (w == 0.0) continue;
    const auto x = grid->center(cell);
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double dx = x[static_cast<std::size_t>(a)] - rep.center[static_cast<std::size_t>(a)];
      r2 += dx * dx;
    }
    by_dist.push_back({std::sqrt(r2), w * grid->cell_volume()});
  }
  std::sort(by_dist.begin(), by_dist.end());
  double outside = 0.0;
  rep.r_empirical = 0.0;
  for (std::size_t i = by_dist.size(); i-- > 0;) {
    outside += by_dist[i].second;
    if (outside > rep.bound + 1e-12) {
      rep.r_empirical = by_dist[i].first;
      break;
    }
  }
  return rep;
}

double radial_ball_value(const CostPtr& c, int dim, double R, double abs_tol) {
  if (!c->radial()) throw InvalidArgument("radial ball value needs a radial cost");
  if (!(R > 0.0)) throw InvalidArgument("ball radius must be > 0");
  const auto k = [&](double r) { return c->kbar(r, dim); };
  const double d = static_cast<double>(dim);
  if (dim == 1) {
    return 2.0 * R * k(R);
  }
  // Substitute r = R u^2 to tame the r -> 0 end for d >= 2.
  const auto integrand = [&](double u) {
    const double r = R * u * u;
    const double s = std::pow(std::pow(R, d) + std::pow(r, d), 1.0 / d);
    return k(s - r) * std::pow(r, d - 1.0) * 2.0 * R * u;
  };
  const double shell = d * unit_ball_volume(dim);
  return shell * integrate(integrand, 0.0, 1.0, abs_tol / std::max(1.0, shell));
}

}  // namespace extot
