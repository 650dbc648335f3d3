#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

#include "sortgraph/activity_registry.hpp"
#include "sortgraph/segmented_bitmap.hpp"
#include "sortgraph/types.hpp"
#include "sortgraph/vertex_table.hpp"

namespace sortgraph {

struct EdgeBlock {
  std::uint32_t dst;  // destination vertex offset
  Weight weight;
};

struct LogBlock {
  std::uint32_t dst;
  Weight weight;       // kTombstone for deletions
  std::uint32_t time;  // 0 until the entry is published
};

static_assert(sizeof(EdgeBlock) == kEdgeBlockBytes);
static_assert(sizeof(LogBlock) == kLogBlockBytes);

// One edge array: `deg` snapshot blocks followed by `cap - deg` log blocks,
// allocated in a single piece after this header. Versions are immutable
// except for log publication and the prev link, which garbage collection
// may cut.
struct EdgeVersion {
  std::uint32_t created_at;
  std::uint32_t deg;
  std::uint32_t cap;
  std::uint32_t history_truncated;
  EdgeVersion* prev;

  EdgeBlock* snapshot() noexcept { return reinterpret_cast<EdgeBlock*>(this + 1); }
  LogBlock* log() noexcept { return reinterpret_cast<LogBlock*>(snapshot() + deg); }
  std::uint32_t log_capacity() const noexcept { return cap - deg; }
};
static_assert(sizeof(EdgeVersion) % alignof(EdgeBlock) == 0);

struct CompactionEvent {
  Offset vertex = 0;
  std::uint32_t scanned = 0;    // blocks visited by the reverse pass
  std::uint32_t survivors = 0;  // live destinations emitted
  std::uint32_t deg = 0;        // block fields after the swap
  std::uint32_t size = 0;
  std::uint32_t cap = 0;
  bool array_freed = false;     // no live edges: header-only version
  Timestamp created_at = 0;
  bool reordered = false;       // log was not time-ordered and got sorted
  bool checker_clean = true;    // only computed with audit_checker
};

struct EdgeStoreOptions {
  std::size_t bitmap_segment_bits = SegmentedBitmap::kDefaultSegmentBits;
  // Full-scan the duplicate checker after every pass (tests).
  bool audit_checker = false;
};

struct EdgeStoreStats {
  std::uint64_t compactions = 0;
  std::uint64_t blocks_visited = 0;
  std::uint64_t bootstraps = 0;
  std::uint64_t reordered_logs = 0;
  std::uint64_t versions_reclaimed = 0;
  std::uint64_t dirty_checker_scans = 0;
  // Reachable storage, maintained incrementally.
  std::uint64_t versions = 0;
  std::uint64_t snapshot_blocks = 0;
  std::uint64_t log_slots = 0;
};

// Per-vertex snapshot/log edge arrays with version chains.
class EdgeStore {
 public:
  using CompactionObserver = std::function<void(const CompactionEvent&)>;
  // Timestamp below which no reader will ever look; used for opportunistic
  // version collection after compaction. May be empty.
  using HorizonSource = std::function<Timestamp()>;

  EdgeStore(VertexTable& table, ActivityRegistry& registry, EdgeStoreOptions options = {});
  ~EdgeStore();

  EdgeStore(const EdgeStore&) = delete;
  EdgeStore& operator=(const EdgeStore&) = delete;

  // Appends a log entry for edge vertex->dst (weight kTombstone deletes).
  // The write timestamp is drawn from `scope` after the slot is reserved
  // and returned. Compacts when the entry fills the array.
  Timestamp append(Offset vertex, Offset dst, Weight weight, ActivityRegistry::Scope& scope);

  // Live out-edges of `vertex` as of t. The caller guarantees the vertex is
  // visible at t and holds a registry scope.
  void neighbors(Offset vertex, Timestamp t, std::vector<OffsetNeighbor>& out) const;

  // Drops versions no reader at or after `horizon` can select.
  std::size_t gc_versions(Offset vertex, Timestamp horizon);
  // Hands a whole unreachable chain to the registry.
  void retire_chain(Offset vertex, EdgeVersion* head);

  std::size_t version_count(Offset vertex) const;

  EdgeStoreStats stats() const;
  // Walks every chain of every allocated vertex (quiescent use).
  EdgeStoreStats audit() const;

  void set_compaction_observer(CompactionObserver observer) { observer_ = std::move(observer); }
  void set_horizon_source(HorizonSource source) { horizon_ = std::move(source); }

  std::size_t bitmap_segment_bits() const noexcept { return options_.bitmap_segment_bits; }
  // The calling thread's duplicate checker for this store.
  SegmentedBitmap& local_checker() const;

 private:
  static constexpr std::size_t kStripes = 4096;

  struct Entry {
    std::uint32_t dst;
    Weight weight;
    std::uint32_t time;
  };

  static EdgeVersion* allocate_version(std::uint32_t deg, std::uint32_t cap);
  std::mutex& stripe(Offset vertex) const { return stripes_[logical_id(vertex) % kStripes]; }

  void bootstrap(VertexBlock& block, Offset vertex, Offset dst, Weight weight, ActivityRegistry::Scope& scope,
                 Timestamp& out_time);
  void compact(Offset vertex, VertexBlock& block);
  // Snapshot plus the published log entries with time <= limit, time-ordered.
  bool gather(EdgeVersion* version, Timestamp limit, std::vector<Entry>& out) const;
  bool keep_destination(std::uint32_t dst, std::uint32_t entry_time, Timestamp cutoff) const;
  void retire_version(EdgeVersion* version);

  VertexTable& table_;
  ActivityRegistry& registry_;
  EdgeStoreOptions options_;
  std::uint64_t store_id_;
  CompactionObserver observer_;
  HorizonSource horizon_;
  mutable std::array<std::mutex, kStripes> stripes_;

  std::atomic<std::uint64_t> compactions_{0};
  std::atomic<std::uint64_t> blocks_visited_{0};
  std::atomic<std::uint64_t> bootstraps_{0};
  std::atomic<std::uint64_t> reordered_{0};
  std::atomic<std::uint64_t> reclaimed_{0};
  mutable std::atomic<std::uint64_t> dirty_scans_{0};
  std::atomic<std::uint64_t> versions_{0};
  std::atomic<std::uint64_t> snapshot_blocks_{0};
  std::atomic<std::uint64_t> log_slots_{0};
};

}  // namespace sortgraph
