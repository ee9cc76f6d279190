#include "extot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace extot {

Grid::Grid(int dim, std::vector<std::int64_t> extent, double spacing,
           std::vector<double> origin)
    : dim_(dim),
      extent_(std::move(extent)),
      spacing_(spacing),
      origin_(std::move(origin)) {
  if (dim_ < 1) throw InvalidArgument("grid dimension must be >= 1");
  if (!(spacing_ > 0.0)) throw InvalidArgument("grid spacing must be > 0");
  if (static_cast<int>(extent_.size()) != dim_ ||
      static_cast<int>(origin_.size()) != dim_) {
    throw InvalidArgument("extent/origin length must equal grid dimension");
  }
  cells_ = 1;
  for (std::int64_t n : extent_) {
    if (n < 1) throw InvalidArgument("grid extent must be >= 1 per axis");
    if (cells_ > (INT64_MAX / n)) throw LimitExceeded("grid too large");
    cells_ *= n;
  }
  if (cells_ > (std::int64_t{1} << 26)) {
    throw LimitExceeded("grid exceeds the supported desk-scale cell count");
  }
  stride_.assign(dim_, 1);
  for (int a = dim_ - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * extent_[a + 1];
  cell_volume_ = std::pow(spacing_, dim_);
}

std::vector<std::int64_t> Grid::multi_index(std::int64_t cell) const {
  std::vector<std::int64_t> multi(dim_);
  for (int a = 0; a < dim_; ++a) {
    multi[a] = cell / stride_[a];
    cell %= stride_[a];
  }
  return multi;
}

std::int64_t Grid::linear_index(const std::vector<std::int64_t>& multi) const {
  std::int64_t cell = 0;
  for (int a = 0; a < dim_; ++a) {
    if (multi[a] < 0 || multi[a] >= extent_[a]) {
      throw InvalidArgument("multi-index out of grid bounds");
    }
    cell += multi[a] * stride_[a];
  }
  return cell;
}

std::vector<double> Grid::center(std::int64_t cell) const {
  std::vector<double> x(dim_);
  for (int a = 0; a < dim_; ++a) {
    const std::int64_t idx = cell / stride_[a];
    cell %= stride_[a];
    x[a] = origin_[a] + spacing_ * static_cast<double>(idx);
  }
  return x;
}

std::int64_t Grid::index_dist2(std::int64_t a, std::int64_t b) const {
  std::int64_t d2 = 0;
  for (int ax = 0; ax < dim_; ++ax) {
    const std::int64_t ia = a / stride_[ax], ib = b / stride_[ax];
    a %= stride_[ax];
    b %= stride_[ax];
    d2 += (ia - ib) * (ia - ib);
  }
  return d2;
}

double Grid::diameter() const {
  double d2 = 0;
  for (int a = 0; a < dim_; ++a) {
    const double span = spacing_ * static_cast<double>(extent_[a] - 1);
    d2 += span * span;
  }
  return std::sqrt(d2);
}

bool Grid::same_layout(const Grid& other) const {
  return dim_ == other.dim_ && extent_ == other.extent_ &&
         spacing_ == other.spacing_ && origin_ == other.origin_;
}

GridPtr make_grid(int dim, std::vector<std::int64_t> extent, double spacing,
                  std::vector<double> origin) {
  return std::make_shared<const Grid>(dim, std::move(extent), spacing,
                                      std::move(origin));
}

GridPtr make_centered_grid(int dim, double half_width, double spacing) {
  const auto n = static_cast<std::int64_t>(std::llround(2.0 * half_width / spacing));
  if (n < 1) throw InvalidArgument("centered grid would be empty");
  // n cells per axis, centers at -(n-1)/2*h .. (n-1)/2*h.
  const double o = -0.5 * spacing * static_cast<double>(n - 1);
  return make_grid(dim, std::vector<std::int64_t>(dim, n), spacing,
                   std::vector<double>(dim, o));
}

Field::Field(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw InvalidArgument("field requires a grid");
  values_.assign(static_cast<std::size_t>(grid_->cells()), 0.0);
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidArgument("field requires a grid");
  if (static_cast<std::int64_t>(values_.size()) != grid_->cells()) {
    throw InvalidArgument("field value count does not match grid");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("density values must lie in [0, 1]");
    }
  }
}

void Field::set(std::int64_t i, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidArgument("density values must lie in [0, 1]");
  }
  values_[static_cast<std::size_t>(i)] = v;
}

namespace {

// Densities live in [0, 1], so value * 2^53 is integral for every double in
// range (subnormal-tiny values snap to the 2^-53 lattice). Summing these
// integers exactly makes mass and l1_distance independent of enumeration
// order.
inline __int128 fixed_point53(double v) {
  return static_cast<__int128>(std::llround(std::ldexp(v, 53)));
}

inline double from_fixed_point53(__int128 acc) {
  return std::ldexp(static_cast<double>(acc), -53);
}

}  // namespace

double Field::mass() const {
  __int128 acc = 0;
  for (double v : values_) acc += fixed_point53(v);
  return from_fixed_point53(acc) * grid_->cell_volume();
}

bool Field::is_indicator(double tol) const {
  for (double v : values_) {
    if (std::min(v, 1.0 - v) > tol) return false;
  }
  return true;
}

double mass(const Field& f) { return f.mass(); }

double l1_distance(const Field& a, const Field& b) {
  if (!a.grid()->same_layout(*b.grid())) {
    throw InvalidArgument("l1_distance requires identical grids");
  }
  __int128 acc = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    const __int128 d = fixed_point53(a.values()[i]) - fixed_point53(b.values()[i]);
    acc += d < 0 ? -d : d;
  }
  return from_fixed_point53(acc) * a.grid()->cell_volume();
}

void write_field_csv(std::ostream& os, const Field& f) {
  const Grid& g = *f.grid();
  os << "cell";
  for (int a = 0; a < g.dim(); ++a) os << ",i" << a;
  for (int a = 0; a < g.dim(); ++a) os << ",x" << a;
  os << ",value\n";
  char buf[64];
  for (std::int64_t c = 0; c < g.cells(); ++c) {
    os << c;
    for (std::int64_t m : g.multi_index(c)) os << ',' << m;
    for (double x : g.center(c)) {
      std::snprintf(buf, sizeof buf, ",%.12g", x);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.12g",
                  f.values()[static_cast<std::size_t>(c)]);
    os << buf << '\n';
  }
}

}  // namespace extot
