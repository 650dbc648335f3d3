#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sortgraph/graph_store.hpp"

namespace sortgraph::analytics {

inline constexpr std::uint64_t kUnreachableHops = std::numeric_limits<std::uint64_t>::max();
inline constexpr double kUnreachableDistance = std::numeric_limits<double>::max();

// Per-vertex values indexed by logical id (offset / 32). Only slots of
// vertices visible at the snapshot are meaningful.
template <class T>
struct AlgoResult {
  std::vector<T> values;
  std::vector<std::uint8_t> present;
  std::vector<VertexId> ids;

  std::size_t size() const {
    std::size_t n = 0;
    for (std::uint8_t p : present) n += p;
    return n;
  }

  std::map<VertexId, T> by_id() const {
    std::map<VertexId, T> out;
    for (std::size_t i = 0; i < values.size(); ++i)
      if (present[i]) out.emplace(ids[i], values[i]);
    return out;
  }
};

// `vertex_id,value` rows sorted by id, header included.
template <class T>
void write_csv(std::ostream& out, const AlgoResult<T>& result);

// Vertices at hop distance 1..k from the source.
std::set<VertexId> khop(const Snapshot& snapshot, VertexId source, unsigned k);

AlgoResult<std::uint64_t> bfs(const Snapshot& snapshot, VertexId source);
AlgoResult<double> sssp(const Snapshot& snapshot, VertexId source);

// Synchronous pull iterations from 1/n. Mass held by vertices without
// out-edges is not redistributed. Each vertex's sum is accumulated by one
// thread in in-edge order, so results do not depend on `threads`.
AlgoResult<double> pagerank(const Snapshot& snapshot, unsigned iterations = 20, double damping = 0.85,
                            unsigned threads = 1);

// Label = smallest logical id in the weakly connected component.
AlgoResult<std::uint64_t> wcc(const Snapshot& snapshot, unsigned threads = 1);

// Triangles of the undirected simple view, each counted once.
std::uint64_t triangle_count(const Snapshot& snapshot, unsigned threads = 1);

// Unweighted Brandes accumulation from the given sources.
AlgoResult<double> betweenness(const Snapshot& snapshot, const std::vector<VertexId>& sources, unsigned threads = 1);

// Offset-space adjacency materialized from a snapshot, indexed by logical id.
struct Csr {
  std::vector<std::uint64_t> begin;  // size bound + 1
  std::vector<std::uint64_t> target;  // logical ids
  std::vector<float> weight;
  std::vector<std::uint8_t> present;
  std::vector<VertexId> ids;
  std::uint64_t vertex_count = 0;

  std::uint64_t bound() const { return present.size(); }
};

Csr materialize(const Snapshot& snapshot);

}  // namespace sortgraph::analytics
