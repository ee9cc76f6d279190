#pragma once

#include <cstdint>
#include <vector>

#include "extot/common.hpp"

namespace extot {

// Exact min-cost flow on a bipartite transportation network: integer
// supplies that must ship fully, integer sink capacities that bound the
// second marginal, arc costs on the exact lattice. Successive shortest
// augmenting paths with integer node potentials; every quantity stays
// integral, so optima are exact and the duality gap is literally zero.
class MinCostFlow {
 public:
  MinCostFlow(std::int32_t n_sources, std::int32_t n_sinks);

  void set_supply(std::int32_t source, std::int64_t units);
  void set_capacity(std::int32_t sink, std::int64_t units);

  void reserve_arcs(std::size_t n);
  // Arcs must be added grouped by source in increasing source order;
  // within a source, increasing sink order (lexicographic tie-break rule).
  void add_arc(std::int32_t source, std::int32_t sink, std::int64_t cost);

  // Permutes heap tie-breaking and per-source scan order; used to probe
  // degenerate optima. Zero keeps the lexicographic order.
  void set_order_seed(std::uint64_t seed) { order_seed_ = seed; }

  // Returns false when the remaining supply cannot reach free capacity
  // through the current arc set.
  bool solve();

  __int128 objective_units() const { return objective_; }
  std::int64_t shipped_units() const { return shipped_total_; }

  struct ArcFlow {
    std::int32_t source;
    std::int32_t sink;
    std::int64_t flow;
    std::int64_t cost;
  };
  std::vector<ArcFlow> flows() const;

  // LP duals in cost units: u over sources (equality rows), v over sinks
  // (capacity rows, v <= 0). Complementary slackness holds exactly.
  const std::vector<std::int64_t>& dual_source() const { return dual_u_; }
  const std::vector<std::int64_t>& dual_sink() const { return dual_v_; }

 private:
  std::int32_t ns_, nt_;
  std::vector<std::int64_t> supply_, capacity_;
  std::vector<std::int64_t> shipped_, filled_;
  std::vector<std::int32_t> arc_head_;
  std::vector<std::int64_t> arc_cost_;
  std::vector<std::int64_t> arc_flow_;
  std::vector<std::size_t> adj_start_;  // CSR over sources, built on solve
  std::vector<std::int32_t> arc_src_tmp_;
  std::vector<std::vector<std::uint32_t>> carrying_;  // per sink: arcs with flow > 0
  std::vector<std::int64_t> dual_u_, dual_v_;
  __int128 objective_ = 0;
  std::int64_t shipped_total_ = 0;
  std::uint64_t order_seed_ = 0;
  bool finalized_ = false;

  void finalize_csr();
};

}  // namespace extot
