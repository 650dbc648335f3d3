#pragma once

#include <cstdint>
#include <vector>

#include "sortgraph/harness/edge_list.hpp"

namespace sortgraph::harness {

// Chung-Lu style directed graph: endpoint i is drawn with weight
// (i + 1)^(-1 / (exponent - 1)). Vertex ids are random distinct 32-bit values.
// Duplicate pairs are kept; they act as updates on ingestion.
std::vector<EdgeRecord> power_law_edges(std::uint64_t vertices, std::uint64_t edges, double exponent,
                                        std::uint64_t seed);

// Same over caller-supplied ids; ids[0] gets the largest weight.
std::vector<EdgeRecord> power_law_edges(const std::vector<VertexId>& ids, std::uint64_t edges, double exponent,
                                        std::uint64_t seed);

// Uniform random directed edges over ids 0..vertices-1 with weights in
// [1, 10). No self-loops; duplicates dropped.
std::vector<EdgeRecord> random_edges(std::uint64_t vertices, std::uint64_t edges, std::uint64_t seed);

// Small dense graph modeled after the dota-league interaction network:
// few vertices, high average degree, heavy-tailed degree spread.
struct DenseGraph {
  std::vector<VertexId> vertices;
  std::vector<EdgeRecord> edges;
};
DenseGraph dota_like(std::uint64_t vertices, std::uint64_t avg_degree, std::uint64_t seed);

}  // namespace sortgraph::harness
