#pragma once

#include <cstdint>
#include <limits>

namespace sortgraph {

using VertexId = std::uint64_t;
// Byte position of a vertex block inside the vertex table.
using Offset = std::uint64_t;
using Timestamp = std::uint64_t;
using Weight = float;

// Deletion marker stored in the weight field of a log block. Live edges
// always carry a nonzero weight.
inline constexpr Weight kTombstone = 0.0f;

inline constexpr std::uint64_t kVertexBlockBytes = 32;
inline constexpr std::uint64_t kEdgeBlockBytes = 8;
inline constexpr std::uint64_t kLogBlockBytes = 12;
inline constexpr std::uint64_t kSlotBytes = 8;

// Edge and log blocks keep 32-bit offsets and times, so both domains are
// bounded; the store refuses to grow past these limits.
inline constexpr Offset kMaxOffset = std::numeric_limits<std::uint32_t>::max() - kVertexBlockBytes + 1;
inline constexpr Timestamp kMaxTimestamp = std::numeric_limits<std::uint32_t>::max() - 16;

constexpr std::uint64_t logical_id(Offset offset) noexcept { return offset / kVertexBlockBytes; }
constexpr Offset offset_of(std::uint64_t logical) noexcept { return logical * kVertexBlockBytes; }

struct Neighbor {
  VertexId id;
  Weight weight;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct OffsetNeighbor {
  Offset offset;
  Weight weight;

  friend bool operator==(const OffsetNeighbor&, const OffsetNeighbor&) = default;
};

}  // namespace sortgraph
