#include "extot/cost.hpp"

#include <algorithm>
#include <cmath>

namespace extot {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::vector<double>> sample_directions(int dim, int count) {
  std::vector<std::vector<double>> dirs;
  if (dim == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
    return dirs;
  }
  if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * kPi * static_cast<double>(i) / count;
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  // d >= 3: axes plus diagonal directions.
  for (int a = 0; a < dim; ++a) {
    std::vector<double> e(dim, 0.0);
    e[a] = 1.0;
    dirs.push_back(e);
    e[a] = -1.0;
    dirs.push_back(e);
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int mask = 0; mask < (1 << dim); ++mask) {
    std::vector<double> e(dim);
    for (int a = 0; a < dim; ++a) e[a] = (mask >> a & 1) ? inv : -inv;
    dirs.push_back(e);
  }
  return dirs;
}

}  // namespace

std::shared_ptr<const Cost> Cost::power(double p, double cap_radius) {
  if (!(p > 0.0)) throw InvalidArgument("cost exponent must be > 0");
  auto c = std::shared_ptr<Cost>(new Cost);
  c->kind_ = Kind::RadialPower;
  c->p_ = p;
  c->cap_radius_ = cap_radius;
  return c;
}

std::shared_ptr<const Cost> Cost::radial_table(std::vector<double> radii,
                                               std::vector<double> values,
                                               double cap_radius) {
  if (radii.size() != values.size() || radii.empty()) {
    throw InvalidArgument("radial table needs matching nonempty knot arrays");
  }
  auto c = std::shared_ptr<Cost>(new Cost);
  c->kind_ = Kind::RadialTable;
  c->cap_radius_ = cap_radius;
  c->knot_r_.push_back(0.0);
  c->knot_v_.push_back(0);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > c->knot_r_.back())) {
      throw InvalidArgument("radial table knots must be strictly increasing");
    }
    if (values[i] < 0.0) throw InvalidArgument("radial table values must be >= 0");
    c->knot_r_.push_back(radii[i]);
    c->knot_v_.push_back(to_units(values[i]));
  }
  return c;
}

std::shared_ptr<const Cost> Cost::anisotropic(double p, std::vector<double> angles,
                                              std::vector<double> weights,
                                              double cap_radius) {
  if (!(p > 0.0)) throw InvalidArgument("cost exponent must be > 0");
  if (weights.empty()) throw InvalidArgument("anisotropic cost needs weights");
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("direction weights must be > 0");
  }
  auto c = std::shared_ptr<Cost>(new Cost);
  c->kind_ = Kind::Anisotropic;
  c->p_ = p;
  c->cap_radius_ = cap_radius;
  if (angles.empty()) {
    if (weights.size() != 2) {
      throw InvalidArgument("one-dimensional anisotropic cost needs {w-, w+}");
    }
    c->weights_ = std::move(weights);
    return c;
  }
  if (angles.size() != weights.size()) {
    throw InvalidArgument("angle/weight arrays must match");
  }
  std::vector<std::size_t> order(angles.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return angles[a] < angles[b]; });
  for (std::size_t i : order) {
    double a = std::fmod(angles[i], 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    c->angles_.push_back(a);
    c->weights_.push_back(weights[i]);
  }
  return c;
}

double Cost::raw(double r, const std::vector<double>& sigma) const {
  switch (kind_) {
    case Kind::RadialPower:
      return std::pow(r, p_);
    case Kind::RadialTable: {
      if (r <= 0.0) return 0.0;
      const auto it = std::upper_bound(knot_r_.begin(), knot_r_.end(), r);
      const std::size_t hi = static_cast<std::size_t>(it - knot_r_.begin());
      if (hi >= knot_r_.size()) {
        // Extrapolate with the final slope.
        const std::size_t n = knot_r_.size();
        const double slope = (from_units(knot_v_[n - 1]) - from_units(knot_v_[n - 2])) /
                             (knot_r_[n - 1] - knot_r_[n - 2]);
        return from_units(knot_v_[n - 1]) + slope * (r - knot_r_[n - 1]);
      }
      const std::size_t lo = hi - 1;
      const double t = (r - knot_r_[lo]) / (knot_r_[hi] - knot_r_[lo]);
      return from_units(knot_v_[lo]) + t * (from_units(knot_v_[hi]) - from_units(knot_v_[lo]));
    }
    case Kind::Anisotropic: {
      if (r <= 0.0) return 0.0;
      double w;
      if (angles_.empty()) {
        w = sigma[0] < 0.0 ? weights_[0] : weights_[1];
      } else if (angles_.size() == 1) {
        w = weights_[0];
      } else {
        double a = std::atan2(sigma[1], sigma[0]);
        if (a < 0) a += 2.0 * kPi;
        const auto it = std::upper_bound(angles_.begin(), angles_.end(), a);
        const std::size_t hi = static_cast<std::size_t>(it - angles_.begin()) % angles_.size();
        const std::size_t lo = (hi + angles_.size() - 1) % angles_.size();
        double span = angles_[hi] - angles_[lo];
        double off = a - angles_[lo];
        if (span <= 0) span += 2.0 * kPi;
        if (off < 0) off += 2.0 * kPi;
        const double t = span > 0 ? off / span : 0.0;
        w = weights_[lo] + t * (weights_[hi] - weights_[lo]);
      }
      return std::pow(r, p_) * w;
    }
  }
  return 0.0;
}

std::int64_t Cost::units(const std::vector<double>& z) const {
  double r2 = 0.0;
  for (double v : z) r2 += v * v;
  const double r = std::sqrt(r2);
  if (r == 0.0) return 0;
  if (has_cap() && r > cap_radius_) return kCostInf;
  if (kind_ == Kind::Anisotropic && !angles_.empty() && z.size() != 2) {
    throw InvalidArgument("angle-table anisotropic cost requires d = 2");
  }
  if (kind_ == Kind::Anisotropic && angles_.empty() && z.size() != 1) {
    throw InvalidArgument("two-weight anisotropic cost requires d = 1");
  }
  std::vector<double> sigma(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) sigma[i] = z[i] / r;
  return to_units(raw(r, sigma));
}

double Cost::eval(const std::vector<double>& z) const {
  const std::int64_t u = units(z);
  if (u >= kCostInf) return std::numeric_limits<double>::infinity();
  return from_units(u);
}

std::int64_t Cost::units_at(double r, const std::vector<double>& sigma) const {
  if (r <= 0.0) return 0;
  if (has_cap() && r > cap_radius_) return kCostInf;
  return to_units(raw(r, sigma));
}

double Cost::kbar(double r, int dim) const {
  if (r <= 0.0) return 0.0;
  if (radial()) return from_units(units_at(r, {}));
  double m = 0.0;
  for (const auto& s : sample_directions(dim, 256)) {
    m = std::max(m, raw(r, s));
  }
  return m;
}

double Cost::kmin_sphere(double r, int dim) const {
  if (r <= 0.0) return 0.0;
  if (radial()) return from_units(units_at(r, {}));
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : sample_directions(dim, 256)) {
    m = std::min(m, raw(r, s));
  }
  return m;
}

double Cost::lipschitz(double R, double h, int dim) const {
  if (!(h > 0.0)) throw InvalidArgument("lipschitz estimate needs h > 0");
  double lip = 0.0;
  const auto dirs = radial() ? std::vector<std::vector<double>>{std::vector<double>(
                                   static_cast<std::size_t>(dim), 0.0)}
                             : sample_directions(dim, 64);
  const int n = std::max(4, static_cast<int>(std::ceil(R / h)));
  for (const auto& s : dirs) {
    std::vector<double> sigma = s;
    if (radial()) {
      sigma.assign(static_cast<std::size_t>(dim), 0.0);
      sigma[0] = 1.0;
    }
    double prev = raw(0.0, sigma);
    for (int i = 1; i <= n; ++i) {
      const double r = std::min(R, h * static_cast<double>(i));
      const double v = raw(r, sigma);
      lip = std::max(lip, (v - prev) / h);
      prev = v;
      if (r >= R) break;
    }
  }
  return lip;
}

HypothesisReport validate_hypotheses(const Cost& c, int dim, double probe_radius) {
  HypothesisReport rep;
  double R = probe_radius;
  if (R <= 0.0) {
    R = c.has_cap() ? c.cap_radius() : 4.0;
    if (c.kind() == Cost::Kind::RadialTable) R = std::max(R, 4.0);
  }
  rep.zero_at_origin = c.units_at(0.0, {}) == 0;
  if (!rep.zero_at_origin) rep.notes.push_back("k(0) != 0");

  const auto dirs = sample_directions(dim, 64);
  const int samples = 64;
  bool increasing = true, positive = true;
  for (const auto& s : dirs) {
    std::int64_t prev = 0;
    for (int i = 1; i <= samples; ++i) {
      const double r = R * static_cast<double>(i) / samples;
      const std::int64_t v = c.units_at(r, s);
      if (v >= kCostInf) break;
      if (v <= prev) {
        increasing = false;
      }
      if (v <= 0) positive = false;
      prev = v;
    }
  }
  rep.radially_increasing = increasing;
  if (!increasing) {
    rep.notes.push_back("flat or decreasing segment found on a sampled ray");
  }
  rep.positive_off_origin = positive;
  if (!positive) rep.notes.push_back("k vanishes away from the origin");

  // Coercivity: honored through the cap, or through growth at the far end.
  if (c.has_cap()) {
    rep.coercive = true;
    rep.notes.push_back("coercivity represented by cap radius");
  } else {
    const double far = c.kbar(2.0 * R, dim);
    const double near = c.kbar(R, dim);
    rep.coercive = far > near;
    if (!rep.coercive) rep.notes.push_back("no growth beyond probe radius and no cap");
  }
  return rep;
}

SupportRadius support_radius_detail(const Cost& c, int dim, double m) {
  if (!(m > 0.0)) throw InvalidArgument("support radius needs m > 0");
  SupportRadius out;
  out.rho1 = std::pow(3.0 * m, 1.0 / dim);
  const double corner = std::sqrt(static_cast<double>(dim)) * out.rho1;

  // Max of k over the rho1-cube. Along-ray monotonicity puts the maximum on
  // the boundary; the corner is exact for radial costs, sampled otherwise.
  double M = 0.0;
  if (c.radial()) {
    M = c.kbar(corner, dim);
  } else {
    for (const auto& s : sample_directions(dim, 512)) {
      bool positive = true;
      double tmax = std::numeric_limits<double>::infinity();
      for (int a = 0; a < dim; ++a) {
        if (s[static_cast<std::size_t>(a)] <= 0.0) {
          positive = false;
          break;
        }
        tmax = std::min(tmax, out.rho1 / s[static_cast<std::size_t>(a)]);
      }
      if (!positive) continue;
      M = std::max(M, from_units(std::min(c.units_at(tmax, s), kCostInf - 1)));
    }
    M = std::max(M, from_units(std::min(
                        c.units_at(corner, std::vector<double>(
                                               static_cast<std::size_t>(dim),
                                               1.0 / std::sqrt(double(dim)))),
                        kCostInf - 1)));
  }
  out.cube_max = M;

  // Fixed absolute step keeps R(m) non-decreasing in m.
  const double step = 1.0 / 64.0;
  double R = step * std::floor(corner / step + 1.0);
  while (true) {
    if (c.has_cap() && R > c.cap_radius()) {
      out.radius = c.cap_radius();
      out.capped = true;
      return out;
    }
    if (c.kmin_sphere(R, dim) > M) break;
    R += step;
    if (R > corner + 1e7) {
      throw InternalError("support radius search failed to terminate");
    }
  }
  out.radius = R;
  return out;
}

double support_radius(const Cost& c, int dim, double m) {
  return support_radius_detail(c, dim, m).radius;
}

DisplacementTable::DisplacementTable(const GridPtr& grid, const CostPtr& cost,
                                     int threads)
    : grid_(grid), cost_(cost) {
  const int d = grid->dim();
  span_.resize(static_cast<std::size_t>(d));
  stride_.resize(static_cast<std::size_t>(d));
  grid_stride_.resize(static_cast<std::size_t>(d));
  std::int64_t total = 1;
  for (int a = 0; a < d; ++a) {
    span_[static_cast<std::size_t>(a)] = 2 * grid->extent()[static_cast<std::size_t>(a)] - 1;
    total *= span_[static_cast<std::size_t>(a)];
  }
  for (int a = d - 1; a >= 0; --a) {
    stride_[static_cast<std::size_t>(a)] =
        (a == d - 1) ? 1 : stride_[static_cast<std::size_t>(a + 1)] * span_[static_cast<std::size_t>(a + 1)];
    grid_stride_[static_cast<std::size_t>(a)] =
        (a == d - 1) ? 1
                     : grid_stride_[static_cast<std::size_t>(a + 1)] *
                           grid->extent()[static_cast<std::size_t>(a + 1)];
  }
  table_.assign(static_cast<std::size_t>(total), 0);
  const double h = grid->spacing();
  parallel_for(static_cast<std::size_t>(total), threads, [&](std::size_t idx) {
    std::int64_t rem = static_cast<std::int64_t>(idx);
    std::vector<double> z(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const std::int64_t q = rem / stride_[static_cast<std::size_t>(a)];
      rem %= stride_[static_cast<std::size_t>(a)];
      z[static_cast<std::size_t>(a)] =
          h * static_cast<double>(q - (grid->extent()[static_cast<std::size_t>(a)] - 1));
    }
    table_[idx] = cost_->units(z);
  });
}

std::size_t DisplacementTable::offset_index(std::int64_t a, std::int64_t b) const {
  const int d = grid_->dim();
  std::size_t idx = 0;
  std::int64_t ra = a, rb = b;
  for (int ax = 0; ax < d; ++ax) {
    const std::int64_t gs = grid_stride_[static_cast<std::size_t>(ax)];
    const std::int64_t ia = ra / gs, ib = rb / gs;
    ra %= gs;
    rb %= gs;
    idx += static_cast<std::size_t>(
        (ib - ia + grid_->extent()[static_cast<std::size_t>(ax)] - 1) *
        stride_[static_cast<std::size_t>(ax)]);
  }
  return idx;
}

}  // namespace extot
