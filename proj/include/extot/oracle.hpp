#pragma once

#include <cstdint>
#include <vector>

#include "extot/cost.hpp"
#include "extot/grid.hpp"

namespace extot {

// Independent brute-force verifiers. These share the quantization with the
// main solver (so agreement is exact) but none of its code paths: the LP is
// solved by a dense exact simplex, the 1-d values come from closed-form
// monotone pairing, and the bathtub check enumerates.

struct BruteLpResult {
  __int128 objective_units = 0;  // same scale as Plan::objective_units
  double value = 0.0;
  std::vector<std::array<std::int64_t, 3>> entries;  // source, target, flow units
};

// Dense exterior-transport LP solved by an exact integer simplex (the
// transportation matrix is totally unimodular, so every pivot stays
// integral). Hard limit: 200 cells.
BruteLpResult brute_lp(const Field& f, const CostPtr& c, int quantum_bits = 20);

// Exterior transport value of the single-interval density level*[a,b] in
// one dimension under a convex increasing radial cost, by the monotone
// outward pairing. Levels at or below 1/2 ride along the diagonal for free.
double monotone_1d(double a, double b, double level, const CostPtr& c,
                   double abs_tol = 1e-9);

// Enumeration oracle for the bathtub step: maximizes sum f*xi*h^d over
// fields with values in {0, 1/2, 1} and mass m. Hard limit: 12 cells.
double exhaustive_bathtub(const GridPtr& grid, const std::vector<double>& xi,
                          double m);

}  // namespace extot
