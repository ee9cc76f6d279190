#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "extot/cost.hpp"
#include "extot/grid.hpp"

namespace extot {

struct PlanEntry {
  std::int64_t source;      // cell index
  std::int64_t target;      // cell index
  std::int64_t flow_units;  // integer mass units
  std::int64_t cost_units;  // lattice cost of the arc
};

// Optimal plan of the quantized transportation LP, together with the exact
// objective, the LP duals it was certified with, and the pruning radii.
class Plan {
 public:
  GridPtr grid;
  CostPtr cost;
  std::vector<PlanEntry> entries;  // lexicographic (source, target)
  double quantum = 0.0;            // mass per flow unit
  int quantum_bits = 20;
  __int128 objective_units = 0;

  double value() const;
  double entry_mass(const PlanEntry& e) const { return quantum * static_cast<double>(e.flow_units); }

  // Duals of the quantized LP in cost units, defined on the active cells.
  std::vector<std::int64_t> source_cells, sink_cells;
  std::vector<std::int64_t> dual_u, dual_v;  // parallel to the cell lists

  double r_proof = 0.0;     // proof-faithful support radius
  double r_active = 0.0;    // pruning radius actually used
  double max_arc_length = 0.0;
  bool r_capped = false;    // pruning hit the grid or the cost cap

  std::int64_t total_supply_units = 0;
};

struct SolveOptions {
  int quantum_bits = 20;
  int threads = 0;             // 0: hardware default
  std::uint64_t order_seed = 0;
  double start_radius = 0.0;   // 0: automatic
  bool dual_post_check = true;
};

// Exact optimum of the discrete problem: ship f into the free space 1 - f
// at minimal cost, with arcs pruned to the support radius and the incumbent
// certified by a full dual-feasibility sweep.
Plan solve_exterior(const Field& f, const CostPtr& c, const SolveOptions& opt = {});

// Per-cell marginals of a plan, as densities.
std::pair<Field, Field> plan_marginals(const Plan& plan);

struct SaturationReport {
  double fraction_classified = 1.0;  // among cells kept after the boundary cut
  std::int64_t included = 0;
  std::int64_t excluded_boundary = 0;
  std::int64_t violations = 0;
  std::vector<std::int64_t> violating_cells;
  std::vector<std::uint8_t> set_E;  // estimated active set
  double tol = 0.0;
};

// Classifies each cell of the second marginal as g = 1-f (active set E),
// g = f (inactive), or violating, with cells on the E/E^c interface
// excluded from the violation count.
SaturationReport saturation_report(const Field& f, const Plan& plan,
                                   double tol = 0.0);

struct UniquenessReport {
  double max_l1_spread = 0.0;
  bool values_identical = true;
  int trials = 0;
};

// Re-solves with permuted tie-breaking and reports the largest L1 distance
// between the resulting second marginals.
UniquenessReport second_marginal_uniqueness_check(const Field& f, const CostPtr& c,
                                                  int trials,
                                                  const SolveOptions& opt = {});

// Classical equality-constrained transport cost between densities of equal
// mass (after shared quantization).
double classical_cost(const Field& f, const Field& g, const CostPtr& c,
                      const SolveOptions& opt = {});

void write_plan_csv(std::ostream& os, const Plan& plan);

}  // namespace extot
