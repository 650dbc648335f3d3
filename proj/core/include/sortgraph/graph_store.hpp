#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "sortgraph/activity_registry.hpp"
#include "sortgraph/edge_store.hpp"
#include "sortgraph/mutation.hpp"
#include "sortgraph/sort_index.hpp"
#include "sortgraph/sort_optimizer.hpp"
#include "sortgraph/types.hpp"
#include "sortgraph/vertex_table.hpp"

namespace sortgraph {

enum class ReoptimizeMode { background, synchronous, disabled };

struct GraphOptions {
  unsigned bits = 32;
  unsigned layers = 0;  // 0 = ceil(lg bits)
  // Vertex count the initial configuration is optimized for; the index is
  // re-optimized each time the live count doubles past it.
  std::uint64_t expected_vertices = 1024;
  std::optional<FanoutConfig> initial_config;
  ReoptimizeMode reoptimize = ReoptimizeMode::background;
  std::size_t bitmap_segment_bits = SegmentedBitmap::kDefaultSegmentBits;
  std::size_t registry_entries = ActivityRegistry::kDefaultEntries;
  std::size_t initial_segment_blocks = VertexTable::kInitialSegmentBlocks;
  // Keep every edge version and never recycle vertex slots, so any past
  // timestamp stays readable without holding a snapshot.
  bool retain_history = false;
  bool audit_checker = false;
};

struct StorageStats {
  std::uint64_t index_slots = 0;
  std::uint64_t index_nodes = 0;
  std::uint64_t vertex_blocks = 0;
  std::uint64_t vertex_capacity_blocks = 0;
  std::uint64_t live_vertices = 0;
  std::uint64_t edge_versions = 0;
  std::uint64_t snapshot_blocks = 0;
  std::uint64_t log_slots = 0;

  friend bool operator==(const StorageStats&, const StorageStats&) = default;
};

using MutationObserver = std::function<void(const Mutation&)>;

class GraphStore;

// A registered read timestamp. While it is held, nothing visible at that
// timestamp is reclaimed. Reads through the handle see the graph exactly as
// of timestamp().
class Snapshot {
 public:
  Snapshot(Snapshot&&) noexcept = default;
  Snapshot& operator=(Snapshot&&) noexcept = default;
  ~Snapshot() = default;

  Timestamp timestamp() const noexcept { return t_; }
  bool released() const noexcept { return pin_ == nullptr; }
  // Raises double_release on the second call.
  void release();

  bool contains(VertexId id) const;
  std::vector<Neighbor> neighbors(VertexId id) const;

  // Offset-level access used by traversal code. resolve() is the only call
  // that consults the radix index.
  std::optional<Offset> resolve(VertexId id) const;
  void neighbors_of(Offset vertex, std::vector<OffsetNeighbor>& out) const;
  // Visible vertices in offset order (a table scan; no index lookups).
  std::vector<Offset> vertices() const;
  VertexId id_of(Offset vertex) const;
  // Every visible vertex has a logical id below this bound.
  std::uint64_t logical_bound() const;

  const GraphStore& graph() const noexcept { return *graph_; }

 private:
  friend class GraphStore;
  Snapshot(const GraphStore& graph, std::unique_ptr<ActivityRegistry::ReaderPin> pin);
  void check_live() const;

  const GraphStore* graph_;
  std::unique_ptr<ActivityRegistry::ReaderPin> pin_;
  Timestamp t_;
};

// Dynamic graph: radix index from vertex ids to vertex-table offsets, and
// per-vertex snapshot/log edge arrays holding destination offsets. All
// operations are safe to call concurrently.
class GraphStore {
 public:
  explicit GraphStore(GraphOptions options = {});
  ~GraphStore();

  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;

  // Returns the vertex's offset, creating it if absent.
  Offset insert_vertex(VertexId id);
  void delete_vertex(VertexId id);

  // Inserting creates missing endpoints; insert and update are the same
  // upsert. Update and delete require both endpoints to exist.
  void insert_edge(VertexId src, VertexId dst, Weight weight);
  void update_edge(VertexId src, VertexId dst, Weight weight);
  void delete_edge(VertexId src, VertexId dst);

  std::vector<Neighbor> get_neighbors(VertexId id) const;
  std::vector<Neighbor> get_neighbors(VertexId id, Timestamp t) const;
  bool has_vertex(VertexId id) const;
  bool has_vertex(VertexId id, Timestamp t) const;

  // Current reads and snapshot() read at the latest issued timestamp once
  // every write up to it is published: they see every write that completed
  // before they started, including the caller's own.

  Snapshot snapshot() const;
  Snapshot snapshot_at(Timestamp t) const;
  void release(Snapshot& snapshot) const { snapshot.release(); }

  // Latest timestamp at which every write is complete.
  Timestamp now() const { return registry_.stable_now(); }
  std::uint64_t vertex_count() const noexcept { return live_vertices_.load(std::memory_order_relaxed); }

  FanoutConfig config() const;
  // Re-optimizes for the current vertex count; true if the layout changed.
  bool reoptimize();
  void wait_for_reoptimization();
  std::uint64_t reoptimizations() const noexcept { return reoptimizations_.load(std::memory_order_relaxed); }

  // Drops edge versions no reader can reach and frees retired memory.
  std::size_t collect_garbage();

  StorageStats storage_stats() const;
  // Same figures, recomputed by walking the structures (quiescent use).
  StorageStats audit_storage() const;
  EdgeStoreStats edge_stats() const { return edges_.stats(); }

  // Called on the writing thread with the write still in flight, so the
  // observer must not read this store. Set before any concurrent use.
  void set_observer(MutationObserver observer) { observer_ = std::move(observer); }
  void set_compaction_observer(EdgeStore::CompactionObserver observer) { edges_.set_compaction_observer(std::move(observer)); }

  std::uint64_t index_lookups() const noexcept { return index_->lookup_count(); }
  void reset_index_lookups() noexcept { index_->reset_lookup_count(); }
  const SortIndex& index() const noexcept { return *index_; }
  const VertexTable& table() const noexcept { return table_; }
  const EdgeStore& edges() const noexcept { return edges_; }
  const GraphOptions& options() const noexcept { return options_; }

 private:
  friend class Snapshot;

  Offset ensure_vertex(ActivityRegistry::Scope& scope, VertexId id, bool& created);
  Offset require_live(VertexId id) const;
  void write_edge(MutationKind kind, VertexId src, VertexId dst, Weight weight);
  bool alive_at(Offset vertex, Timestamp t) const;

  std::optional<Offset> resolve(VertexId id, Timestamp t) const;
  bool visible(Offset vertex, Timestamp t) const;
  void read_neighbors(Offset vertex, Timestamp t, std::vector<Neighbor>& out) const;
  Timestamp wait_until_stable(Timestamp t) const;
  void check_history(Timestamp t) const;
  Timestamp reclaim_horizon() const;
  void raise_history_floor(Timestamp floor) const;
  Timestamp recycle_horizon() const;

  void notify(MutationKind kind, VertexId src, VertexId dst, Weight weight, Timestamp t) const;
  void maybe_reoptimize();
  bool reoptimize_for(std::uint64_t n);
  void worker_loop();

  GraphOptions options_;
  mutable ActivityRegistry registry_;
  VertexTable table_;
  EdgeStore edges_;
  std::unique_ptr<SortIndex> index_;

  std::atomic<std::uint64_t> live_vertices_{0};
  mutable std::atomic<Timestamp> history_floor_{0};
  MutationObserver observer_;

  std::mutex adapt_mutex_;
  std::atomic<std::uint64_t> optimized_for_{1};
  std::atomic<std::uint64_t> reoptimizations_{0};
  std::mutex worker_mutex_;
  std::condition_variable worker_cv_;
  std::uint64_t worker_request_ = 0;
  bool worker_busy_ = false;
  bool worker_stop_ = false;
  std::thread worker_;
};

}  // namespace sortgraph
