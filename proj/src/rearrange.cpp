#include "extot/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "extot/dual.hpp"

namespace extot {

namespace {

// Cells ordered by distance to the coordinate origin, ties by index.
std::vector<std::int64_t> radial_order(const Grid& grid) {
  const auto n = static_cast<std::size_t>(grid.cells());
  std::vector<double> d2(n);
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (double x : grid.center(static_cast<std::int64_t>(c))) s += x * x;
    d2[c] = s;
  }
  std::vector<std::int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    const double da = d2[static_cast<std::size_t>(a)], db = d2[static_cast<std::size_t>(b)];
    if (da != db) return da < db;
    return a < b;
  });
  return order;
}

RadialProfile grouped_profile(const Grid& grid,
                              const std::vector<std::int64_t>& order,
                              const std::vector<double>& values) {
  RadialProfile prof;
  double cur_r = -1.0;
  double acc = 0.0;
  int count = 0;
  auto flush = [&]() {
    if (count > 0) {
      prof.radii.push_back(cur_r);
      prof.values.push_back(acc / count);
    }
  };
  for (std::int64_t c : order) {
    double s = 0.0;
    for (double x : grid.center(c)) s += x * x;
    const double r = std::sqrt(s);
    if (count == 0 || r != cur_r) {
      flush();
      cur_r = r;
      acc = 0.0;
      count = 0;
    }
    acc += values[static_cast<std::size_t>(c)];
    ++count;
  }
  flush();
  return prof;
}

}  // namespace

Rearranged decreasing_rearrangement(const GridPtr& grid,
                                    const std::vector<double>& phi) {
  if (static_cast<std::int64_t>(phi.size()) != grid->cells()) {
    throw InvalidArgument("rearrangement input size mismatch");
  }
  for (double v : phi) {
    if (!(v >= 0.0)) throw InvalidArgument("decreasing rearrangement needs values >= 0");
  }
  std::vector<double> sorted = phi;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  const auto order = radial_order(*grid);
  Rearranged out;
  out.values.assign(phi.size(), 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.values[static_cast<std::size_t>(order[k])] = sorted[k];
  }
  out.profile = grouped_profile(*grid, order, out.values);
  return out;
}

Rearranged increasing_rearrangement(const GridPtr& grid,
                                    const std::vector<double>& psi) {
  std::vector<double> neg(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (!(psi[i] <= 0.0)) {
      throw InvalidArgument("increasing rearrangement needs values <= 0");
    }
    neg[i] = -psi[i];
  }
  Rearranged star = decreasing_rearrangement(grid, neg);
  for (auto& v : star.values) v = -v;
  for (auto& v : star.profile.values) v = -v;
  return star;
}

std::int64_t LevelSet::count() const {
  std::int64_t c = 0;
  for (std::uint8_t m : mask) c += m ? 1 : 0;
  return c;
}

double LevelSet::volume() const {
  return static_cast<double>(count()) * grid->cell_volume();
}

LevelSet superlevel(const GridPtr& grid, const std::vector<double>& values, double t) {
  if (static_cast<std::int64_t>(values.size()) != grid->cells()) {
    throw InvalidArgument("level set input size mismatch");
  }
  LevelSet s{grid, std::vector<std::uint8_t>(values.size(), 0)};
  for (std::size_t i = 0; i < values.size(); ++i) s.mask[i] = values[i] > t ? 1 : 0;
  return s;
}

LevelSet sublevel(const GridPtr& grid, const std::vector<double>& values, double t) {
  LevelSet s{grid, std::vector<std::uint8_t>(values.size(), 0)};
  for (std::size_t i = 0; i < values.size(); ++i) s.mask[i] = values[i] < t ? 1 : 0;
  return s;
}

std::vector<std::int64_t> distance2_to_complement(const LevelSet& set,
                                                  bool outside_is_complement) {
  const Grid& grid = *set.grid;
  const int dim = grid.dim();
  const auto n = static_cast<std::size_t>(grid.cells());
  const std::int64_t inf = INT64_MAX / 4;
  std::vector<std::int64_t> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = set.mask[i] ? inf : 0;

  // Separable exact squared distance transform, one axis at a time.
  std::vector<std::int64_t> line, out;
  for (int a = 0; a < dim; ++a) {
    const std::int64_t len = grid.extent()[static_cast<std::size_t>(a)];
    std::int64_t stride = 1;
    for (int j = a + 1; j < dim; ++j) stride *= grid.extent()[static_cast<std::size_t>(j)];
    const std::int64_t rows = grid.cells() / len;
    line.assign(static_cast<std::size_t>(len), 0);
    out.assign(static_cast<std::size_t>(len), 0);
    for (std::int64_t row = 0; row < rows; ++row) {
      // Base index of this row: expand row over the remaining axes.
      const std::int64_t block = row / stride;
      const std::int64_t rem = row % stride;
      const std::int64_t base = block * stride * len + rem;
      for (std::int64_t i = 0; i < len; ++i) {
        line[static_cast<std::size_t>(i)] = d2[static_cast<std::size_t>(base + i * stride)];
      }
      for (std::int64_t i = 0; i < len; ++i) {
        std::int64_t best = line[static_cast<std::size_t>(i)];
        for (std::int64_t j = 0; j < len; ++j) {
          const std::int64_t cand = line[static_cast<std::size_t>(j)] + (i - j) * (i - j);
          if (cand < best) best = cand;
        }
        out[static_cast<std::size_t>(i)] = best;
      }
      for (std::int64_t i = 0; i < len; ++i) {
        d2[static_cast<std::size_t>(base + i * stride)] = out[static_cast<std::size_t>(i)];
      }
    }
  }

  if (outside_is_complement) {
    for (std::size_t c = 0; c < n; ++c) {
      const auto multi = grid.multi_index(static_cast<std::int64_t>(c));
      for (int a = 0; a < dim; ++a) {
        const std::int64_t to_edge =
            std::min(multi[static_cast<std::size_t>(a)] + 1,
                     grid.extent()[static_cast<std::size_t>(a)] - multi[static_cast<std::size_t>(a)]);
        d2[c] = std::min(d2[c], to_edge * to_edge);
      }
    }
  }
  return d2;
}

LevelSet erode(const LevelSet& set, double r, bool outside_is_complement) {
  if (r < 0.0) throw InvalidArgument("erosion radius must be >= 0");
  const auto d2 = distance2_to_complement(set, outside_is_complement);
  const double h = set.grid->spacing();
  const double r_cells2 = (r / h) * (r / h);
  LevelSet out{set.grid, std::vector<std::uint8_t>(set.mask.size(), 0)};
  for (std::size_t i = 0; i < set.mask.size(); ++i) {
    out.mask[i] = (set.mask[i] && static_cast<double>(d2[i]) > r_cells2) ? 1 : 0;
  }
  return out;
}

RearrangementCheckReport ctransform_rearrangement_check(
    const GridPtr& grid, const CostPtr& cost, const std::vector<double>& psi,
    int max_thresholds, int threads) {
  if (!cost->radial()) {
    throw InvalidArgument("rearrangement comparison requires a radial cost");
  }
  RearrangementCheckReport rep;
  const double h = grid->spacing();

  Transformer t(grid, cost, threads);
  const auto psi_units = [&] {
    std::vector<std::int64_t> u(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) u[i] = to_units(psi[i]);
    return u;
  }();
  const auto psic_units = t.forward(psi_units);
  std::vector<double> psic(psi.size());
  for (std::size_t i = 0; i < psic.size(); ++i) psic[i] = from_units(psic_units[i]);

  const Rearranged psis = increasing_rearrangement(grid, psi);
  const auto psis_units = [&] {
    std::vector<std::int64_t> u(psis.values.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = to_units(psis.values[i]);
    return u;
  }();
  const auto psisc_units = t.forward(psis_units);
  const Rearranged psic_star = decreasing_rearrangement(grid, [&] {
    std::vector<double> nn(psic);
    for (double& v : nn) v = std::max(v, 0.0);
    return nn;
  }());

  // Pointwise route.
  double worst = -1e300;
  for (std::size_t i = 0; i < psic.size(); ++i) {
    worst = std::max(worst, psic_star.values[i] - from_units(psisc_units[i]));
  }
  const double lip = cost->lipschitz(grid->diameter(), h, grid->dim());
  rep.worst_pointwise = worst;
  rep.tol = 2.0 * h * lip + 4.0 * kLatticeStep;
  rep.pointwise_ok = worst <= rep.tol;

  // Volume route: |{psi^c > t}| <= |{-psi > t - k(r)}_r| for sampled t, r.
  std::vector<double> ts(psic.begin(), psic.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::vector<double> thresholds;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i] > 0.0) thresholds.push_back(ts[i]);
    const double mid = 0.5 * (ts[i] + ts[i + 1]);
    if (mid > 0.0) thresholds.push_back(mid);
  }
  if (!ts.empty() && ts.back() > 0.0) thresholds.push_back(ts.back());
  if (static_cast<int>(thresholds.size()) > max_thresholds) {
    std::vector<double> pick;
    const double step = static_cast<double>(thresholds.size()) / max_thresholds;
    for (int i = 0; i < max_thresholds; ++i) {
      pick.push_back(thresholds[static_cast<std::size_t>(i * step)]);
    }
    thresholds = pick;
  }

  std::vector<double> neg_psi(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) neg_psi[i] = -psi[i];

  // Only grid cells enter the discrete transform, so the complement used in
  // the erosion is the on-grid complement; radii stay below the cost cap,
  // beyond which arcs stop constraining the conjugate.
  double r_max = grid->diameter();
  if (cost->has_cap()) r_max = std::min(r_max, cost->cap_radius());
  std::int64_t worst_excess = INT64_MIN;
  for (double tt : thresholds) {
    const auto above = superlevel(grid, psic, tt).count();
    std::int64_t best_bound = INT64_MAX;
    for (double r = 0.0; r <= r_max; r += h) {
      const double level = tt - cost->kbar(r, grid->dim());
      LevelSet mask = superlevel(grid, neg_psi, level);
      const bool full = mask.count() == grid->cells();
      const LevelSet er = erode(mask, r, false);
      best_bound = std::min(best_bound, er.count());
      if (full && level < 0.0) break;  // larger r cannot shrink the bound
    }
    worst_excess = std::max(worst_excess, above - best_bound);
  }
  rep.worst_volume_excess = worst_excess == INT64_MIN ? 0 : worst_excess;
  rep.volume_ok = rep.worst_volume_excess <= 0;
  rep.thresholds_checked = static_cast<int>(thresholds.size());
  return rep;
}

PairingCheckReport hardy_littlewood_check(const Field& f,
                                          const std::vector<double>& xi) {
  if (static_cast<std::int64_t>(xi.size()) != f.grid()->cells()) {
    throw InvalidArgument("pairing input size mismatch");
  }
  PairingCheckReport rep;
  const double hv = f.grid()->cell_volume();
  for (std::size_t i = 0; i < xi.size(); ++i) {
    rep.lhs += f.values()[i] * xi[i];
  }
  rep.lhs *= hv;
  // Both factors sorted descending and paired: the rearrangement
  // inequality gives the upper bound; radial assignment realizes it.
  std::vector<double> fs = f.values(), xs = xi;
  std::sort(fs.begin(), fs.end(), std::greater<double>());
  std::sort(xs.begin(), xs.end(), std::greater<double>());
  for (std::size_t i = 0; i < xs.size(); ++i) rep.rhs += fs[i] * xs[i];
  rep.rhs *= hv;
  rep.ok = rep.lhs <= rep.rhs + 1e-9 * (1.0 + std::abs(rep.rhs));
  return rep;
}

double unit_ball_volume(int dim) {
  return std::pow(std::acos(-1.0), dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
}

ErosionBoundReport brunn_minkowski_check(const LevelSet& set, double s, double slack) {
  if (!(s > 0.0)) throw InvalidArgument("erosion bound needs s > 0");
  ErosionBoundReport rep;
  const int d = set.grid->dim();
  rep.volume = set.volume();
  rep.eroded_volume = erode(set, s).volume();
  rep.ball_term = unit_ball_volume(d) * std::pow(s, d);
  rep.lhs = std::pow(rep.volume, 1.0 / d);
  rep.rhs = std::pow(rep.eroded_volume, 1.0 / d) + std::pow(rep.ball_term, 1.0 / d);
  rep.slack = slack > 0.0 ? slack : 2.0 * set.grid->spacing();
  rep.ok = rep.eroded_volume == 0.0 || rep.lhs >= rep.rhs - rep.slack;
  return rep;
}

void write_profile_csv(std::ostream& os, const RadialProfile& profile) {
  os << "radius,value\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.radii.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g", profile.radii[i], profile.values[i]);
    os << buf << '\n';
  }
}

}  // namespace extot
