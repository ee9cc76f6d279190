#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "extot/common.hpp"
#include "extot/grid.hpp"

namespace extot {

// Translation-invariant cost c(x,y) = k(y-x). Three kinds:
//   - radial power:      k(z) = |z|^p, p > 0
//   - radial table:      piecewise-linear through strictly increasing knots
//   - anisotropic power: k(z) = |z|^p * w(z/|z|), w sampled on the sphere
//     (d = 1: one weight per half-line; d = 2: periodic angle table)
//
// A finite cap radius represents coercivity: beyond it the cost is treated
// as +infinity and arcs are excluded. Values are quantized to the exact
// lattice (see common.hpp) so downstream calculus is exact.
class Cost {
 public:
  enum class Kind { RadialPower, RadialTable, Anisotropic };

  static std::shared_ptr<const Cost> power(double p, double cap_radius = 0.0);
  static std::shared_ptr<const Cost> radial_table(std::vector<double> radii,
                                                  std::vector<double> values,
                                                  double cap_radius = 0.0);
  // d=1 weights: {w_minus, w_plus}. angles empty in that case.
  static std::shared_ptr<const Cost> anisotropic(double p,
                                                 std::vector<double> angles,
                                                 std::vector<double> weights,
                                                 double cap_radius = 0.0);

  Kind kind() const { return kind_; }
  bool radial() const { return kind_ != Kind::Anisotropic; }
  double cap_radius() const { return cap_radius_; }
  bool has_cap() const { return cap_radius_ > 0.0; }
  double exponent() const { return p_; }

  // Exact lattice value of k(z); kCostInf beyond the cap.
  std::int64_t units(const std::vector<double>& z) const;
  double eval(const std::vector<double>& z) const;

  // k along a direction at radius r >= 0. Radial costs ignore sigma.
  std::int64_t units_at(double r, const std::vector<double>& sigma) const;

  // max k over the closed ball of radius r (sampled for anisotropic costs).
  double kbar(double r, int dim) const;
  // min k over the sphere of radius r (sampled for anisotropic costs).
  double kmin_sphere(double r, int dim) const;

  // Sampled local Lipschitz constant of k on [0, R] at resolution h.
  double lipschitz(double R, double h, int dim) const;

 private:
  Cost() = default;
  double raw(double r, const std::vector<double>& sigma) const;

  Kind kind_ = Kind::RadialPower;
  double p_ = 1.0;
  double cap_radius_ = 0.0;
  std::vector<double> knot_r_;
  std::vector<std::int64_t> knot_v_;
  std::vector<double> angles_;   // sorted, in [0, 2*pi)
  std::vector<double> weights_;  // matching angles_, or {w-, w+} for d = 1
};

using CostPtr = std::shared_ptr<const Cost>;

struct HypothesisReport {
  bool zero_at_origin = false;       // k(0) = 0
  bool coercive = false;             // growth toward the cap / at infinity
  bool positive_off_origin = false;  // k > 0 away from 0 on sampled rays
  bool radially_increasing = false;  // strict increase along sampled rays
  std::vector<std::string> notes;
  bool all_pass() const {
    return zero_at_origin && coercive && positive_off_origin &&
           radially_increasing;
  }
};

// Report-only checks of the cost hypotheses on sampled rays. The density
// condition behind the descent hypothesis is not finitely checkable; strict
// radial increase is verified as a sufficient sampled condition.
HypothesisReport validate_hypotheses(const Cost& c, int dim,
                                     double probe_radius = 0.0);

struct SupportRadius {
  double radius = 0.0;
  bool capped = false;
  double rho1 = 0.0;       // side length of the construction cube
  double cube_max = 0.0;   // max k over that cube
};

// Smallest sampled R > sqrt(d)*rho1(m), rho1 = (3m)^(1/d), such that
// k exceeds its maximum over the rho1-cube everywhere beyond radius R.
// Sampling step is a fixed 1/64 so that R is non-decreasing in m.
SupportRadius support_radius_detail(const Cost& c, int dim, double m);
double support_radius(const Cost& c, int dim, double m);

// Exact lattice cost per center-to-center index offset of a grid; shared by
// the flow solver and the dual transforms.
class DisplacementTable {
 public:
  DisplacementTable(const GridPtr& grid, const CostPtr& cost, int threads = 1);

  // Cost units for the displacement (center of cell b) - (center of cell a).
  std::int64_t units(std::int64_t a, std::int64_t b) const {
    return table_[offset_index(a, b)];
  }
  const GridPtr& grid() const { return grid_; }
  const CostPtr& cost() const { return cost_; }

 private:
  std::size_t offset_index(std::int64_t a, std::int64_t b) const;

  GridPtr grid_;
  CostPtr cost_;
  std::vector<std::int64_t> table_;
  std::vector<std::int64_t> stride_;
  std::vector<std::int64_t> span_;
  std::vector<std::int64_t> grid_stride_;
};

}  // namespace extot
