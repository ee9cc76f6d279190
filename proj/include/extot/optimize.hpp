#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "extot/cost.hpp"
#include "extot/dual.hpp"
#include "extot/grid.hpp"
#include "extot/primal.hpp"

namespace extot {

// Maximizer of sum f*xi over 0 <= f <= 1 with mass exactly m: indicator of
// the strict superlevel set at the quantile threshold plus a partial layer
// on the threshold plateau, filled in cell-index order with at most one
// fractional cell.
Field bathtub(const GridPtr& grid, const std::vector<double>& xi, double m);
double bathtub_threshold(const GridPtr& grid, const std::vector<double>& xi, double m);

struct OptimizeIterate {
  double value = 0.0;        // transport value of the iterate
  double mass = 0.0;
  double phi_max = 0.0, psi_min = 0.0;
  bool accepted = false;
};

struct OptimizeTrace {
  std::vector<OptimizeIterate> iterates;
  std::string stop_reason;  // "fixed-point", "cycle", "max-iterations"
  Field final_f;
  double final_value = 0.0;
  // Distance to the best-fit ball: center at the mass centroid, radius from
  // the volume; symmetric difference in L1, divided by m.
  double ball_symmetric_difference = 0.0;
  std::vector<double> ball_center;
  double ball_radius = 0.0;
};

struct MaximizeOptions {
  int max_iterations = 64;
  double tol_scale = 1e-8;  // accept when the value gains more than tol_scale*(1+value)
  SolveOptions solve;
};

// Alternating ascent for the volume-constrained maximization: solve the
// transport problem, extract maximal potentials, rebuild f by the bathtub
// step on phi - psi, accept while the value increases.
OptimizeTrace maximize_shape(double m, const CostPtr& c, const Field& init,
                             const MaximizeOptions& opt = {});

// Symmetric difference to the best-fit ball, as a fraction of m.
double ball_symmetric_difference(const Field& f, double m,
                                 std::vector<double>* center_out = nullptr,
                                 double* radius_out = nullptr);

struct EnergyPoint {
  double m = 0.0;
  double energy = 0.0;      // E_h(m), transport value of the ball of mass m
  double energy_per_mass = 0.0;
  int iterations = 0;       // ascent iterations spent confirming the ball
};

struct EnergyCurve {
  std::vector<EnergyPoint> points;
  bool e_monotone = true;          // E/m non-decreasing along the list
  double min_increase_margin = 0.0;
  bool superadditive = true;       // E(a)+E(b) < E(a+b) for sampled splits
  double min_split_margin = 0.0;
};

// Energy per mass point via the ball value (the proven maximizer), each
// confirmed by one ascent pass from the ball.
EnergyCurve energy_curve(const std::vector<double>& ms, const CostPtr& c,
                         const GridPtr& grid, const MaximizeOptions& opt = {});

struct ConcentrationResult {
  bool found = false;
  std::vector<double> cube_corner;  // corner of the qualifying cube
  double side = 0.0;                // r0(m)
  double mass_in_cube = 0.0;
  double required = 0.0;            // |Q|/2
  // When no cube qualifies the lemma's contrapositive applies:
  double upsilon = 0.0;
  double half_energy = 0.0;
};

// Scans the r0(m)-cube partition anchored at the grid corner for a cube
// holding at least half of its own volume in mass.
ConcentrationResult concentration_cube(const Field& f, double m, const CostPtr& c,
                                       const SolveOptions& opt = {});

struct TightnessReport {
  double epsilon = 0.0;       // E_h(m) - Upsilon(f)
  double energy = 0.0;        // E_h(m)
  double bound = 0.0;         // (2m/E) * epsilon
  double r_star = 0.0;        // proof-faithful concentration radius
  double outside_mass = 0.0;  // mass outside B_{r_star}(best center)
  std::vector<double> center;
  bool holds = false;
  double r_empirical = 0.0;   // smallest radius with outside mass <= bound
};

TightnessReport tightness_report(const Field& f, double m, const CostPtr& c,
                                 const SolveOptions& opt = {});

// Continuum reference value for the ball of radius R under a radial cost:
// transport along s(r) = (R^d + r^d)^(1/d) integrated over radial shells,
// by adaptive quadrature.
double radial_ball_value(const CostPtr& c, int dim, double R,
                         double abs_tol = 1e-9);

}  // namespace extot
