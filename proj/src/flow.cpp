#include "extot/flow.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

namespace extot {

namespace {
constexpr std::int64_t kDistInf = INT64_MAX / 4;
}

MinCostFlow::MinCostFlow(std::int32_t n_sources, std::int32_t n_sinks)
    : ns_(n_sources), nt_(n_sinks) {
  if (ns_ < 0 || nt_ < 0) throw InvalidArgument("negative node count");
  supply_.assign(static_cast<std::size_t>(ns_), 0);
  capacity_.assign(static_cast<std::size_t>(nt_), 0);
}

void MinCostFlow::set_supply(std::int32_t source, std::int64_t units) {
  if (units < 0) throw InvalidArgument("supply must be >= 0");
  supply_[static_cast<std::size_t>(source)] = units;
}

void MinCostFlow::set_capacity(std::int32_t sink, std::int64_t units) {
  if (units < 0) throw InvalidArgument("capacity must be >= 0");
  capacity_[static_cast<std::size_t>(sink)] = units;
}

void MinCostFlow::reserve_arcs(std::size_t n) {
  arc_head_.reserve(n);
  arc_cost_.reserve(n);
  arc_src_tmp_.reserve(n);
}

void MinCostFlow::add_arc(std::int32_t source, std::int32_t sink, std::int64_t cost) {
  if (cost < 0) throw InvalidArgument("arc cost must be >= 0");
  if (!arc_src_tmp_.empty() && source < arc_src_tmp_.back()) {
    throw InvalidArgument("arcs must be added in source order");
  }
  arc_src_tmp_.push_back(source);
  arc_head_.push_back(sink);
  arc_cost_.push_back(cost);
}

void MinCostFlow::finalize_csr() {
  adj_start_.assign(static_cast<std::size_t>(ns_) + 1, 0);
  for (std::int32_t s : arc_src_tmp_) adj_start_[static_cast<std::size_t>(s) + 1]++;
  for (std::size_t i = 1; i < adj_start_.size(); ++i) adj_start_[i] += adj_start_[i - 1];
  arc_flow_.assign(arc_head_.size(), 0);
  carrying_.assign(static_cast<std::size_t>(nt_), {});
  finalized_ = true;
}

bool MinCostFlow::solve() {
  if (!finalized_) finalize_csr();

  const std::int32_t n_nodes = ns_ + nt_ + 2;
  const std::int32_t S = ns_ + nt_;
  const std::int32_t T = ns_ + nt_ + 1;

  shipped_.assign(static_cast<std::size_t>(ns_), 0);
  filled_.assign(static_cast<std::size_t>(nt_), 0);
  std::fill(arc_flow_.begin(), arc_flow_.end(), 0);
  for (auto& c : carrying_) c.clear();
  shipped_total_ = 0;
  objective_ = 0;
  std::int64_t total_supply = 0;
  for (std::int64_t s : supply_) total_supply += s;

  std::vector<std::int64_t> pi(static_cast<std::size_t>(n_nodes), 0);
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n_nodes), 0);
  // parent: arc id * 2 + dir for middle arcs (dir 0 forward src->snk,
  // dir 1 reverse snk->src), -1 for S-seeded sources, -2 unset.
  std::vector<std::int64_t> parent(static_cast<std::size_t>(n_nodes), -2);

  // Optional deterministic permutation for degenerate-tie probing.
  std::vector<std::uint32_t> rank(static_cast<std::size_t>(n_nodes));
  for (std::int32_t i = 0; i < n_nodes; ++i) rank[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i);
  if (order_seed_ != 0) {
    Rng rng(order_seed_);
    rng.shuffle(rank);
  }

  using Item = std::tuple<std::int64_t, std::uint32_t, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;

  while (shipped_total_ < total_supply) {
    // Dijkstra over the residual graph from the implicit super-source.
    std::fill(dist.begin(), dist.end(), kDistInf);
    std::fill(parent.begin(), parent.end(), std::int64_t{-2});
    while (!heap.empty()) heap.pop();
    dist[static_cast<std::size_t>(S)] = 0;
    for (std::int32_t i = 0; i < ns_; ++i) {
      if (supply_[static_cast<std::size_t>(i)] > shipped_[static_cast<std::size_t>(i)]) {
        // Arc S->i, cost 0.
        const std::int64_t nd = pi[static_cast<std::size_t>(S)] - pi[static_cast<std::size_t>(i)];
        if (nd < dist[static_cast<std::size_t>(i)]) {
          dist[static_cast<std::size_t>(i)] = nd;
          parent[static_cast<std::size_t>(i)] = -1;
          heap.emplace(nd, rank[static_cast<std::size_t>(i)], i);
        }
      }
    }

    std::int64_t dist_T = kDistInf;
    std::vector<char> settled(static_cast<std::size_t>(n_nodes), 0);
    while (!heap.empty()) {
      const auto [d, rk, v] = heap.top();
      heap.pop();
      if (settled[static_cast<std::size_t>(v)] || d > dist[static_cast<std::size_t>(v)]) continue;
      settled[static_cast<std::size_t>(v)] = 1;
      if (v == T) {
        dist_T = d;
        break;
      }
      if (v < ns_) {
        // Forward middle arcs.
        const std::size_t lo = adj_start_[static_cast<std::size_t>(v)];
        const std::size_t hi = adj_start_[static_cast<std::size_t>(v) + 1];
        const std::int64_t base = d + pi[static_cast<std::size_t>(v)];
        for (std::size_t a = lo; a < hi; ++a) {
          const std::int32_t j = ns_ + arc_head_[a];
          if (settled[static_cast<std::size_t>(j)]) continue;
          const std::int64_t nd = base + arc_cost_[a] - pi[static_cast<std::size_t>(j)];
          if (nd < dist[static_cast<std::size_t>(j)]) {
            dist[static_cast<std::size_t>(j)] = nd;
            parent[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(a) * 2;
            heap.emplace(nd, rank[static_cast<std::size_t>(j)], j);
          }
        }
      } else {
        const std::size_t j = static_cast<std::size_t>(v - ns_);
        const std::int64_t base = d + pi[static_cast<std::size_t>(v)];
        // Arc j->T while free capacity remains.
        if (filled_[j] < capacity_[j]) {
          const std::int64_t nd = base - pi[static_cast<std::size_t>(T)];
          if (!settled[static_cast<std::size_t>(T)] && nd < dist[static_cast<std::size_t>(T)]) {
            dist[static_cast<std::size_t>(T)] = nd;
            parent[static_cast<std::size_t>(T)] = static_cast<std::int64_t>(v);
            heap.emplace(nd, rank[static_cast<std::size_t>(T)], T);
          }
        }
        // Reverse middle arcs with positive flow.
        auto& carry = carrying_[j];
        std::size_t w = 0;
        for (std::size_t idx = 0; idx < carry.size(); ++idx) {
          const std::uint32_t a = carry[idx];
          if (arc_flow_[a] <= 0) continue;  // lazily dropped below
          carry[w++] = a;
          const std::int32_t i = arc_src_tmp_[a];
          if (settled[static_cast<std::size_t>(i)]) continue;
          const std::int64_t nd = base - arc_cost_[a] - pi[static_cast<std::size_t>(i)];
          if (nd < dist[static_cast<std::size_t>(i)]) {
            dist[static_cast<std::size_t>(i)] = nd;
            parent[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(a) * 2 + 1;
            heap.emplace(nd, rank[static_cast<std::size_t>(i)], i);
          }
        }
        carry.resize(w);
      }
    }

    if (dist_T >= kDistInf) return false;  // remaining supply cut off

    // Potential update, clipped at dist_T for unsettled nodes.
    for (std::int32_t v = 0; v < n_nodes; ++v) {
      pi[static_cast<std::size_t>(v)] += std::min(dist[static_cast<std::size_t>(v)], dist_T);
    }

    // Walk the parent chain to find the bottleneck.
    const std::int32_t last_sink = static_cast<std::int32_t>(parent[static_cast<std::size_t>(T)]);
    std::int64_t delta = capacity_[static_cast<std::size_t>(last_sink - ns_)] -
                         filled_[static_cast<std::size_t>(last_sink - ns_)];
    for (std::int32_t v = last_sink;;) {
      const std::int64_t p = parent[static_cast<std::size_t>(v)];
      if (p == -1) {
        const std::size_t i = static_cast<std::size_t>(v);
        delta = std::min(delta, supply_[i] - shipped_[i]);
        break;
      }
      const std::size_t a = static_cast<std::size_t>(p / 2);
      if (p % 2 == 0) {
        v = arc_src_tmp_[a];  // forward arc: step back to the source
      } else {
        delta = std::min(delta, arc_flow_[a]);  // reverse arc: limited by flow
        v = ns_ + arc_head_[a];
      }
    }

    // Apply the augmentation.
    filled_[static_cast<std::size_t>(last_sink - ns_)] += delta;
    for (std::int32_t v = last_sink;;) {
      const std::int64_t p = parent[static_cast<std::size_t>(v)];
      if (p == -1) {
        shipped_[static_cast<std::size_t>(v)] += delta;
        break;
      }
      const std::size_t a = static_cast<std::size_t>(p / 2);
      if (p % 2 == 0) {
        if (arc_flow_[a] == 0) {
          carrying_[static_cast<std::size_t>(arc_head_[a])].push_back(
              static_cast<std::uint32_t>(a));
        }
        arc_flow_[a] += delta;
        v = arc_src_tmp_[a];
      } else {
        arc_flow_[a] -= delta;
        v = ns_ + arc_head_[a];
      }
    }
    shipped_total_ += delta;
  }

  // Exact objective, arcs in lexicographic order.
  for (std::size_t a = 0; a < arc_flow_.size(); ++a) {
    if (arc_flow_[a] > 0) {
      objective_ += static_cast<__int128>(arc_flow_[a]) * arc_cost_[a];
    }
  }

  // LP duals from the final potentials.
  dual_u_.assign(static_cast<std::size_t>(ns_), 0);
  dual_v_.assign(static_cast<std::size_t>(nt_), 0);
  const std::int64_t piT = pi[static_cast<std::size_t>(T)];
  for (std::int32_t i = 0; i < ns_; ++i) {
    dual_u_[static_cast<std::size_t>(i)] = piT - pi[static_cast<std::size_t>(i)];
  }
  for (std::int32_t j = 0; j < nt_; ++j) {
    dual_v_[static_cast<std::size_t>(j)] =
        std::min<std::int64_t>(0, pi[static_cast<std::size_t>(ns_ + j)] - piT);
  }
  return true;
}

std::vector<MinCostFlow::ArcFlow> MinCostFlow::flows() const {
  std::vector<ArcFlow> out;
  for (std::size_t a = 0; a < arc_flow_.size(); ++a) {
    if (arc_flow_[a] > 0) {
      out.push_back({arc_src_tmp_[a], arc_head_[a], arc_flow_[a], arc_cost_[a]});
    }
  }
  return out;
}

}  // namespace extot
