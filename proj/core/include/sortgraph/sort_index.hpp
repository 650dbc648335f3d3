#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "sortgraph/sort_optimizer.hpp"
#include "sortgraph/types.hpp"

namespace sortgraph {

// Upper-layer nodes detached by SortIndex::adapt. Readers that loaded the
// previous root may still be walking them, so ownership is handed to the
// caller, which frees them once no such reader remains (or immediately, by
// dropping the object, when there are no concurrent readers).
class RetiredNodes {
 public:
  RetiredNodes() = default;
  RetiredNodes(RetiredNodes&& other) noexcept;
  RetiredNodes& operator=(RetiredNodes&& other) noexcept;
  ~RetiredNodes();

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  friend class SortIndex;
  struct State;
  std::vector<std::uint64_t*> nodes_;
  State* state_ = nullptr;
};

// Fixed-depth radix tree from x-bit identifiers to vertex-table offsets.
// Layer i consumes the next fanout(i) bits of the identifier; the deepest
// layer stores offsets.
//
// Lookups are lock-free. Inserts and removals run concurrently with each
// other; creation of a missing child is serialized per slot by a claim bit.
// adapt() excludes writers for the duration of the rebuild.
class SortIndex {
 public:
  explicit SortIndex(const FanoutConfig& config);
  ~SortIndex();

  SortIndex(const SortIndex&) = delete;
  SortIndex& operator=(const SortIndex&) = delete;

  struct InsertResult {
    bool inserted;
    Offset offset;  // the stored offset (the caller's, or the existing one)
  };

  InsertResult insert(VertexId id, Offset offset);
  std::optional<Offset> lookup(VertexId id) const;
  bool remove(VertexId id);
  // Clears the binding only if it still maps to `expected`.
  bool remove_if(VertexId id, Offset expected);
  // Rebinds id from `expected` to `desired`; false if the binding changed.
  bool replace(VertexId id, Offset expected, Offset desired);

  struct AdaptStats {
    unsigned reused_layers = 0;         // common fanout suffix length
    std::uint64_t reused_subtrees = 0;  // subtrees moved without copying
    std::uint64_t rebuilt_nodes = 0;
  };
  // Rebuilds the tree under `config`. Subtrees below the longest common
  // fanout suffix are re-homed rather than copied.
  RetiredNodes adapt(const FanoutConfig& config, AdaptStats* stats = nullptr);

  FanoutConfig config() const;
  unsigned bits() const noexcept { return bits_; }

  // Child slots over all instantiated nodes (tracked incrementally).
  std::uint64_t slot_count() const;
  std::uint64_t node_count() const;
  std::uint64_t bytes() const { return slot_count() * kSlotBytes; }
  // Walks the tree and recounts slots.
  std::uint64_t recount_slots() const;

  std::uint64_t lookup_count() const noexcept { return lookups_.load(std::memory_order_relaxed); }
  void reset_lookup_count() noexcept { lookups_.store(0, std::memory_order_relaxed); }

  // Visits every binding in identifier order. Not synchronized with writers.
  void for_each(const std::function<void(VertexId, Offset)>& visit) const;

 private:
  friend class RetiredNodes;
  struct Tree;

  static std::uint64_t* allocate_node(unsigned fanout);
  static void free_node(std::uint64_t* node);

  Tree* make_tree(const FanoutConfig& config) const;
  std::uint64_t* child_or_create(Tree& tree, std::uint64_t* node, unsigned layer, std::uint64_t index);
  std::uint64_t* leaf_slot(Tree& tree, VertexId id, bool create);
  void check_id(VertexId id) const;

  unsigned bits_;
  std::atomic<Tree*> tree_;
  mutable std::shared_mutex adapt_mutex_;
  mutable std::atomic<std::uint64_t> lookups_{0};
};

}  // namespace sortgraph
