#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "sortgraph/types.hpp"

namespace sortgraph::harness {

struct EdgeRecord {
  VertexId src = 0;
  VertexId dst = 0;
  Weight weight = 1.0f;

  friend bool operator==(const EdgeRecord&, const EdgeRecord&) = default;
};

struct EdgeList {
  std::vector<EdgeRecord> edges;
  // Lines whose weight was 0 and got remapped to the smallest positive float.
  std::vector<std::size_t> zero_weight_lines;
};

// `src dst [weight]` per line, whitespace separated; blank lines and lines
// starting with '#' are skipped. Raises parse_error naming the line.
EdgeList parse_edge_list(std::istream& in);
EdgeList load_edge_list(const std::string& path);

}  // namespace sortgraph::harness
