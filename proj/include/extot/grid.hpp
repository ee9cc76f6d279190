#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <vector>

#include "extot/common.hpp"

namespace extot {

// Regular d-dimensional grid of cell centers: center(multi) = origin + h*multi.
// Immutable after construction.
class Grid {
 public:
  Grid(int dim, std::vector<std::int64_t> extent, double spacing,
       std::vector<double> origin);

  int dim() const { return dim_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return cell_volume_; }
  std::int64_t cells() const { return cells_; }
  const std::vector<std::int64_t>& extent() const { return extent_; }
  const std::vector<double>& origin() const { return origin_; }

  std::vector<std::int64_t> multi_index(std::int64_t cell) const;
  std::int64_t linear_index(const std::vector<std::int64_t>& multi) const;
  std::vector<double> center(std::int64_t cell) const;

  // Squared distance between cell centers, in units of spacing^2; exact
  // integer arithmetic on index differences.
  std::int64_t index_dist2(std::int64_t a, std::int64_t b) const;

  double total_volume() const { return cell_volume_ * static_cast<double>(cells_); }
  // Largest center-to-center distance on the grid.
  double diameter() const;

  bool same_layout(const Grid& other) const;

 private:
  int dim_;
  std::vector<std::int64_t> extent_;
  double spacing_;
  std::vector<double> origin_;
  std::vector<std::int64_t> stride_;
  std::int64_t cells_;
  double cell_volume_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, std::vector<std::int64_t> extent, double spacing,
                  std::vector<double> origin);

// Convenience: grid covering [-half, half]^d with the given spacing, cell
// centers symmetric about the origin.
GridPtr make_centered_grid(int dim, double half_width, double spacing);

// Per-cell density with values in [0, 1].
class Field {
 public:
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<double> values);

  const GridPtr& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::int64_t i) const { return values_[i]; }
  void set(std::int64_t i, double v);

  double mass() const;

  bool is_indicator(double tol = 0.0) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

double mass(const Field& f);
double l1_distance(const Field& a, const Field& b);

// One row per cell: multi-index, coordinates, value.
void write_field_csv(std::ostream& os, const Field& f);

}  // namespace extot
