#pragma once

#include <cstdint>
#include <vector>

#include "extot/cost.hpp"
#include "extot/grid.hpp"

namespace extot {

// Radially sampled values of a symmetric grid function, one entry per
// distinct center radius.
struct RadialProfile {
  std::vector<double> radii;   // strictly increasing
  std::vector<double> values;  // monotone for rearrangement outputs
};

struct Rearranged {
  std::vector<double> values;  // per cell
  RadialProfile profile;
};

// Symmetric decreasing rearrangement about the coordinate origin: cell
// values are reassigned, sorted descending, to cells sorted by distance to
// the origin (ties by cell index). Exactly equimeasurable by construction.
Rearranged decreasing_rearrangement(const GridPtr& grid,
                                    const std::vector<double>& phi);

// Symmetric increasing rearrangement of a nonpositive function:
// psi_* = -(-psi)^*.
Rearranged increasing_rearrangement(const GridPtr& grid,
                                    const std::vector<double>& psi);

struct LevelSet {
  GridPtr grid;
  std::vector<std::uint8_t> mask;

  std::int64_t count() const;
  double volume() const;
};

LevelSet superlevel(const GridPtr& grid, const std::vector<double>& values,
                    double t);  // strict: values > t
LevelSet sublevel(const GridPtr& grid, const std::vector<double>& values,
                  double t);  // strict: values < t

// Squared center-to-center distance (in cell units) from each cell to the
// complement of the mask; off-grid space counts as complement when
// outside_is_complement is set.
std::vector<std::int64_t> distance2_to_complement(const LevelSet& set,
                                                  bool outside_is_complement);

// Erosion {x in Omega : d(x, complement) > r} via the exact distance
// transform, strict inequality.
LevelSet erode(const LevelSet& set, double r, bool outside_is_complement = true);

struct RearrangementCheckReport {
  double worst_pointwise = 0.0;  // max of (psi^c)^* - (psi_*)^c, <= tol expected
  double tol = 0.0;
  bool pointwise_ok = false;
  std::int64_t worst_volume_excess = 0;  // max_t of |{psi^c>t}| - inf_r |...|, <= 0 expected
  bool volume_ok = false;
  int thresholds_checked = 0;
};

// Verifies (psi^c)^* <= (psi_*)^c + 2h*Lip(k) pointwise and the erosion
// volume bound |{psi^c > t}| <= |{-psi > t - k(r)}_r| for sampled t, r.
RearrangementCheckReport ctransform_rearrangement_check(
    const GridPtr& grid, const CostPtr& cost, const std::vector<double>& psi,
    int max_thresholds = 48, int threads = 0);

struct PairingCheckReport {
  double lhs = 0.0;  // sum f * xi * h^d
  double rhs = 0.0;  // sum f^* * xi^* * h^d
  bool ok = false;
};

// Hardy-Littlewood style pairing bound: rearranging both factors
// decreasingly can only increase the pairing.
PairingCheckReport hardy_littlewood_check(const Field& f,
                                          const std::vector<double>& xi);

struct ErosionBoundReport {
  double volume = 0.0;         // |Omega|
  double eroded_volume = 0.0;  // |Omega_s|
  double ball_term = 0.0;      // omega_d s^d
  double lhs = 0.0;            // |Omega|^(1/d)
  double rhs = 0.0;            // |Omega_s|^(1/d) + |B_s|^(1/d)
  bool ok = false;             // lhs >= rhs - slack
  double slack = 0.0;
};

ErosionBoundReport brunn_minkowski_check(const LevelSet& set, double s,
                                         double slack = 0.0);

double unit_ball_volume(int dim);

void write_profile_csv(std::ostream& os, const RadialProfile& profile);

}  // namespace extot
