#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "sortgraph/mutation.hpp"
#include "sortgraph/types.hpp"

namespace sortgraph {

// Visible graph at one timestamp: every visible vertex mapped to its live
// out-neighbors sorted by id.
using AdjacencyView = std::map<VertexId, std::vector<Neighbor>>;

// Versioned adjacency map replaying mutations in timestamp order. Slow by
// design; it is the ground truth the store is checked against.
//
// Visibility at t: a vertex incarnation created at c and deleted at d
// (0 = never) is visible iff c <= t and (d == 0 or t <= d). An edge is
// visible iff its latest write at or before t is not a deletion, that write
// happened during the current incarnations of both endpoints, and both
// endpoints are visible at t.
class OracleGraph {
 public:
  // Mutations must arrive with strictly increasing timestamps. Edge inserts
  // create missing endpoints at the same timestamp.
  void apply(const Mutation& m);

  bool vertex_visible(VertexId id, Timestamp t) const;
  std::vector<Neighbor> neighbors(VertexId id, Timestamp t) const;
  std::vector<VertexId> vertices(Timestamp t) const;
  AdjacencyView view(Timestamp t) const;

  Timestamp last_time() const noexcept { return last_time_; }
  std::size_t mutation_count() const noexcept { return applied_; }

 private:
  struct Incarnation {
    Timestamp created;
    Timestamp deleted;  // 0 = live
  };
  struct Write {
    Timestamp time;
    Weight weight;
  };

  const Incarnation* incarnation_at(VertexId id, Timestamp t) const;
  bool live_now(VertexId id) const;
  void create(VertexId id, Timestamp t);

  std::map<VertexId, std::vector<Incarnation>> vertices_;
  std::map<VertexId, std::map<VertexId, std::vector<Write>>> edges_;
  Timestamp last_time_ = 0;
  std::size_t applied_ = 0;
};

// Reference algorithms over an adjacency view, keyed by vertex id.
namespace oracle {

inline constexpr std::uint64_t kUnreachableHops = UINT64_MAX;

std::set<VertexId> khop(const AdjacencyView& g, VertexId source, unsigned k);
std::map<VertexId, std::uint64_t> bfs(const AdjacencyView& g, VertexId source);
std::map<VertexId, double> sssp(const AdjacencyView& g, VertexId source);
std::map<VertexId, double> pagerank(const AdjacencyView& g, unsigned iterations, double damping);
// Component label = smallest vertex id in the component (edges undirected).
std::map<VertexId, VertexId> wcc(const AdjacencyView& g);
// Triangles of the undirected simple graph (no self-loops, no multi-edges).
std::uint64_t triangle_count(const AdjacencyView& g);
// Brandes dependency accumulation from the given sources, unweighted.
std::map<VertexId, double> betweenness(const AdjacencyView& g, const std::vector<VertexId>& sources);

}  // namespace oracle

}  // namespace sortgraph
