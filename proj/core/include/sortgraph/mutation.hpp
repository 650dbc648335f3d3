#pragma once

#include <string_view>

#include "sortgraph/types.hpp"

namespace sortgraph {

enum class MutationKind { insert_vertex, delete_vertex, insert_edge, update_edge, delete_edge };

std::string_view to_string(MutationKind kind) noexcept;

// A successful mutation and the timestamp it took effect at. Vertex
// mutations leave dst and weight at zero.
struct Mutation {
  MutationKind kind = MutationKind::insert_vertex;
  VertexId src = 0;
  VertexId dst = 0;
  Weight weight = 0.0f;
  Timestamp time = 0;

  friend bool operator==(const Mutation&, const Mutation&) = default;
};

}  // namespace sortgraph
