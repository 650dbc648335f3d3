#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <limits>
#include <mutex>
#include <optional>

#include "sortgraph/types.hpp"

namespace sortgraph {

struct EdgeVersion;

// 32-byte vertex record. Every field is accessed through std::atomic_ref.
// `state` packs the edge-array size (low 32 bits) and capacity (high 32)
// so that log appenders reserve slots with a single fetch_add.
struct alignas(32) VertexBlock {
  std::uint64_t id;
  std::uint32_t del_time;
  std::uint32_t deg;
  std::uint64_t state;
  EdgeVersion* edges;
};
static_assert(sizeof(VertexBlock) == kVertexBlockBytes);

// Per-slot incarnation data kept beside the 32-byte block.
struct VertexMeta {
  std::uint32_t created_at;
  std::uint32_t prev_incarnation;  // logical id + 1 of the previous incarnation, 0 = none
};

inline constexpr std::uint32_t kNeverCreated = std::numeric_limits<std::uint32_t>::max();
// del_time while a deletion is claimed but not yet stamped.
inline constexpr std::uint32_t kDeleting = std::numeric_limits<std::uint32_t>::max();

constexpr std::uint64_t pack_state(std::uint32_t size, std::uint32_t cap) {
  return (static_cast<std::uint64_t>(cap) << 32) | size;
}
constexpr std::uint32_t state_size(std::uint64_t state) { return static_cast<std::uint32_t>(state); }
constexpr std::uint32_t state_cap(std::uint64_t state) { return static_cast<std::uint32_t>(state >> 32); }

struct VertexView {
  VertexId id = 0;
  Timestamp del_time = 0;
  std::uint32_t deg = 0;
  std::uint32_t size = 0;
  std::uint32_t cap = 0;
  EdgeVersion* edges = nullptr;
  Timestamp created_at = 0;
  std::uint64_t prev_incarnation = 0;
};

// A slot tombstoned at del_time with reclamation stamp `stamp` may be
// reused once del_time < horizon and stamp < min_active_epoch.
struct RecyclePolicy {
  Timestamp horizon = std::numeric_limits<Timestamp>::max();
  std::uint64_t min_active_epoch = std::numeric_limits<std::uint64_t>::max();
};

// Segmented table of vertex blocks. Segment 0 and 1 hold `initial` blocks,
// every later segment doubles, so capacity never exceeds twice the number
// of allocated blocks. Blocks never move.
class VertexTable {
 public:
  static constexpr std::size_t kInitialSegmentBlocks = 1024;
  static constexpr std::size_t kMaxSegments = 40;

  explicit VertexTable(std::size_t initial_segment_blocks = kInitialSegmentBlocks);
  ~VertexTable();

  VertexTable(const VertexTable&) = delete;
  VertexTable& operator=(const VertexTable&) = delete;

  using RecyclePolicy = sortgraph::RecyclePolicy;

  struct Allocation {
    Offset offset = 0;
    bool recycled = false;
    VertexId previous_id = 0;              // id last stored in a recycled slot
    EdgeVersion* previous_edges = nullptr;  // its edge chain, now unreachable
  };

  // Initializes a block for `id` created at `created_at`. `prev_offset` links
  // to the previous incarnation of the same id (ignored when it equals the
  // returned offset).
  Allocation allocate(VertexId id, Timestamp created_at, const RecyclePolicy& policy = {},
                      std::optional<Offset> prev_offset = std::nullopt);
  bool has_free_slots() const;
  // Deletion time of the slot the next recycling allocation would take.
  std::optional<Timestamp> oldest_free_deletion() const;

  VertexBlock& block(Offset offset) const;
  VertexMeta& meta(Offset offset) const;
  // nullptr when the offset lies in a segment that does not exist yet.
  VertexBlock* try_block(Offset offset) const;
  VertexView read(Offset offset) const;

  // Claims the block for deletion (del_time 0 -> kDeleting).
  void begin_tombstone(Offset offset);
  // Stamps the deletion time and queues the slot for reuse.
  void finish_tombstone(Offset offset, Timestamp t, std::uint64_t stamp);
  void tombstone(Offset offset, Timestamp t, std::uint64_t stamp = 0);
  // Returns a slot that lost a binding race; it is never visible.
  void abandon(Offset offset, std::uint64_t stamp);

  // Slots handed out so far (fresh allocations; recycling does not grow it).
  std::uint64_t allocated_blocks() const noexcept;
  std::uint64_t capacity_blocks() const noexcept;
  std::uint64_t free_slots() const;
  // Logical ids below this bound may be in use.
  std::uint64_t logical_bound() const noexcept { return allocated_blocks(); }

 private:
  struct Segment {
    VertexBlock* blocks;
    VertexMeta* meta;
  };
  struct FreeSlot {
    Offset offset;
    Timestamp del_time;
    std::uint64_t stamp;
  };

  std::pair<std::size_t, std::size_t> locate(std::uint64_t logical) const;
  std::size_t segment_size(std::size_t segment) const;
  Segment* ensure_segment(std::size_t segment);
  Segment* segment_at(std::size_t segment) const;

  std::size_t initial_;
  std::array<std::atomic<Segment*>, kMaxSegments> segments_{};
  std::atomic<std::uint64_t> next_logical_{0};
  std::mutex grow_mutex_;
  mutable std::mutex free_mutex_;
  std::deque<FreeSlot> free_;
  std::atomic<std::size_t> free_count_{0};
};

// Interpretation of a raw del_time by readers: a claimed but unstamped
// deletion cannot precede any reader's timestamp, so it reads as live.
constexpr Timestamp effective_del_time(std::uint32_t raw) { return raw == kDeleting ? 0 : raw; }

}  // namespace sortgraph
