#pragma once

#include <cstdint>
#include <vector>

#include "extot/cost.hpp"
#include "extot/grid.hpp"
#include "extot/primal.hpp"

namespace extot {

// Conjugation direction: Forward is xi^c(y) = min_x { c(x,y) - xi(x) },
// Reverse is zeta^cbar(x) = min_y { c(x,y) - zeta(y) }.
enum class Transform { Forward, Reverse };

// Exact c-transform engine over one (grid, cost) pair. All arithmetic is
// integer on the value lattice, so conjugation identities hold bitwise.
class Transformer {
 public:
  Transformer(GridPtr grid, CostPtr cost, int threads = 0);

  std::vector<std::int64_t> forward(const std::vector<std::int64_t>& xi) const;
  std::vector<std::int64_t> reverse(const std::vector<std::int64_t>& zeta) const;
  static std::vector<std::int64_t> negative_part(std::vector<std::int64_t> v);

  // P(phi) = ((phi^c)_-)^cbar. Idempotent exactly.
  std::vector<std::int64_t> project(const std::vector<std::int64_t>& phi) const;

  const GridPtr& grid() const { return grid_; }
  const CostPtr& cost() const { return cost_; }

 private:
  std::vector<std::int64_t> apply(const std::vector<std::int64_t>& in, bool fwd) const;
  GridPtr grid_;
  CostPtr cost_;
  DisplacementTable table_;
  int threads_;
};

// Double-precision front ends. Inputs are snapped to the value lattice
// (lossless for dyadic inputs within range); outputs are exact lattice
// values, hence exact doubles.
std::vector<double> c_transform(const GridPtr& grid, const CostPtr& cost,
                                const std::vector<double>& xi, Transform dir,
                                int threads = 0);
std::vector<double> project_P(const GridPtr& grid, const CostPtr& cost,
                              const std::vector<double>& phi, int threads = 0);

// Dual potentials phi (paired with f) and psi <= 0 (paired with 1-f).
class PotentialPair {
 public:
  PotentialPair(GridPtr grid, CostPtr cost, std::vector<std::int64_t> phi,
                std::vector<std::int64_t> psi);

  const GridPtr& grid() const { return grid_; }
  const CostPtr& cost() const { return cost_; }
  const std::vector<std::int64_t>& phi_units() const { return phi_; }
  const std::vector<std::int64_t>& psi_units() const { return psi_; }
  std::vector<double> phi() const;
  std::vector<double> psi() const;

  // K_f(phi, psi) = sum f*phi*h^d + sum (1-f)*psi*h^d.
  double objective(const Field& f) const;

  // Largest violation of phi(x) + psi(y) <= c(x,y) over all pairs, in cost
  // units; <= 0 certifies feasibility.
  std::int64_t feasibility_violation_units(int threads = 0) const;

 private:
  GridPtr grid_;
  CostPtr cost_;
  std::vector<std::int64_t> phi_, psi_;
};

// Feasible canonical potentials built from the LP duals carried by an
// optimal plan; objective matches the plan value to 1e-6 relative.
PotentialPair dual_from_plan(const Field& f, const Plan& plan,
                             int threads = 0);

// Primal value minus the canonical dual objective (signed, for diagnostics).
double duality_gap(const Field& f, const CostPtr& c, const SolveOptions& opt = {});

// Dual-optimal pair whose psi is the pointwise-maximal element of the
// optimal face (equivalently minimal phi), extended canonically.
PotentialPair maximal_potential(const Field& f, const CostPtr& c,
                                const SolveOptions& opt = {});
// Same, reusing an already solved plan for f.
PotentialPair maximal_potential(const Field& f, const Plan& plan,
                                int threads = 0);

struct SlacknessReport {
  // Cells with psi^{cbar c} < 0 must satisfy f + g = 1; cells with
  // psi^{cbar c} > 0 must satisfy g = 0. Fractions are violation rates
  // after removing one layer around the sign interface.
  std::int64_t negative_cells = 0, positive_cells = 0, zero_cells = 0;
  std::int64_t negative_violations = 0, positive_violations = 0;
  std::int64_t excluded_boundary = 0;
  double negative_violation_fraction = 0.0;
  double positive_violation_fraction = 0.0;
  double tol = 0.0;
};

SlacknessReport slackness_report(const Field& f, const Plan& plan,
                                 const PotentialPair& pair, double tol = 0.0);

}  // namespace extot
