#include "sortgraph/sort_index.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>

#include "sortgraph/error.hpp"

namespace sortgraph {

namespace {

// Widest node the index will materialize (2^40 slots is far beyond memory).
constexpr unsigned kMaxNodeFanout = 40;

inline std::uint64_t encode_leaf(Offset offset) { return offset | 1u; }
inline Offset decode_leaf(std::uint64_t value) { return value & ~std::uint64_t{1}; }
inline std::uint64_t* as_node(std::uint64_t value) { return reinterpret_cast<std::uint64_t*>(value); }

inline std::uint64_t load_slot(std::uint64_t* node, std::uint64_t index) {
  return std::atomic_ref<std::uint64_t>(node[index]).load(std::memory_order_acquire);
}

}  // namespace

struct SortIndex::Tree {
  FanoutConfig config;
  std::vector<unsigned> fanout;
  std::vector<unsigned> shift;
  unsigned layers = 0;
  std::uint64_t* root = nullptr;
  std::unique_ptr<std::atomic<std::uint64_t>[]> nodes;

  std::uint64_t slots(unsigned layer) const { return std::uint64_t{1} << fanout[layer]; }
  std::uint64_t index(VertexId id, unsigned layer) const {
    return (id >> shift[layer]) & (slots(layer) - 1);
  }
};

struct RetiredNodes::State {
  std::unique_ptr<SortIndex::Tree> tree;
};

RetiredNodes::RetiredNodes(RetiredNodes&& other) noexcept
    : nodes_(std::move(other.nodes_)), state_(std::exchange(other.state_, nullptr)) {}

RetiredNodes& RetiredNodes::operator=(RetiredNodes&& other) noexcept {
  if (this != &other) {
    this->~RetiredNodes();
    new (this) RetiredNodes(std::move(other));
  }
  return *this;
}

RetiredNodes::~RetiredNodes() {
  for (std::uint64_t* node : nodes_) std::free(node);
  nodes_.clear();
  delete state_;
  state_ = nullptr;
}

std::uint64_t* SortIndex::allocate_node(unsigned fanout) {
  if (fanout > kMaxNodeFanout)
    raise(ErrorCode::capacity, "node fanout 2^" + std::to_string(fanout) + " is too large to materialize");
  const std::uint64_t slots = std::uint64_t{1} << fanout;
  const std::uint64_t claim_words = (slots + 63) / 64;
  void* p = std::calloc(slots + claim_words, sizeof(std::uint64_t));
  if (p == nullptr) raise(ErrorCode::allocation_failure, "cannot allocate a radix node of 2^" + std::to_string(fanout) + " slots");
  return static_cast<std::uint64_t*>(p);
}

void SortIndex::free_node(std::uint64_t* node) { std::free(node); }

SortIndex::Tree* SortIndex::make_tree(const FanoutConfig& config) const {
  if (config.empty()) raise(ErrorCode::invalid_argument, "empty fanout configuration");
  auto tree = std::make_unique<Tree>();
  tree->config = config;
  tree->layers = config.layers();
  const auto prefix = config.prefix_sums();
  for (unsigned i = 0; i < tree->layers; ++i) {
    tree->fanout.push_back(config.fanout(i));
    tree->shift.push_back(config.bits() - prefix[i]);
  }
  tree->nodes = std::make_unique<std::atomic<std::uint64_t>[]>(tree->layers);
  tree->root = allocate_node(tree->fanout[0]);
  tree->nodes[0].store(1, std::memory_order_relaxed);
  return tree.release();
}

SortIndex::SortIndex(const FanoutConfig& config) : bits_(config.bits()), tree_(make_tree(config)) {}

namespace {

template <class Visit>
void walk(std::uint64_t* node, unsigned layer, const std::vector<unsigned>& fanout, std::uint64_t prefix, Visit&& visit) {
  const std::uint64_t slots = std::uint64_t{1} << fanout[layer];
  const bool leaf = layer + 1 == fanout.size();
  for (std::uint64_t i = 0; i < slots; ++i) {
    const std::uint64_t v = load_slot(node, i);
    if (v == 0) continue;
    const std::uint64_t key = (prefix << fanout[layer]) | i;
    if (leaf) {
      visit.leaf(key, decode_leaf(v));
    } else if (visit.child(as_node(v), layer + 1, key)) {
      walk(as_node(v), layer + 1, fanout, key, visit);
    }
  }
}

}  // namespace

SortIndex::~SortIndex() {
  Tree* tree = tree_.load(std::memory_order_acquire);
  struct {
    std::vector<std::uint64_t*>* out;
    void leaf(std::uint64_t, Offset) {}
    bool child(std::uint64_t* node, unsigned, std::uint64_t) {
      out->push_back(node);
      return true;
    }
  } collect;
  std::vector<std::uint64_t*> nodes{tree->root};
  collect.out = &nodes;
  walk(tree->root, 0, tree->fanout, 0, collect);
  for (std::uint64_t* node : nodes) free_node(node);
  delete tree;
}

void SortIndex::check_id(VertexId id) const {
  if (bits_ < 64 && (id >> bits_) != 0)
    raise(ErrorCode::capacity, "identifier " + std::to_string(id) + " does not fit in " + std::to_string(bits_) + " bits");
}

std::uint64_t* SortIndex::child_or_create(Tree& tree, std::uint64_t* node, unsigned layer, std::uint64_t index) {
  std::atomic_ref<std::uint64_t> slot(node[index]);
  std::uint64_t v = slot.load(std::memory_order_acquire);
  if (v != 0) return as_node(v);

  std::atomic_ref<std::uint64_t> claim(node[tree.slots(layer) + index / 64]);
  const std::uint64_t bit = std::uint64_t{1} << (index % 64);
  for (;;) {
    if ((claim.fetch_or(bit, std::memory_order_acq_rel) & bit) == 0) {
      v = slot.load(std::memory_order_acquire);
      if (v == 0) {
        std::uint64_t* child;
        try {
          child = allocate_node(tree.fanout[layer + 1]);
        } catch (...) {
          claim.fetch_and(~bit, std::memory_order_release);
          throw;
        }
        v = reinterpret_cast<std::uint64_t>(child);
        slot.store(v, std::memory_order_release);
        tree.nodes[layer + 1].fetch_add(1, std::memory_order_relaxed);
      }
      claim.fetch_and(~bit, std::memory_order_release);
      return as_node(v);
    }
    // Another writer is creating this child; wait for it to publish.
    for (unsigned spins = 0;; ++spins) {
      v = slot.load(std::memory_order_acquire);
      if (v != 0) return as_node(v);
      if ((claim.load(std::memory_order_acquire) & bit) == 0) break;
      if (spins > 64) std::this_thread::yield();
    }
  }
}

std::uint64_t* SortIndex::leaf_slot(Tree& tree, VertexId id, bool create) {
  std::uint64_t* node = tree.root;
  for (unsigned layer = 0; layer + 1 < tree.layers; ++layer) {
    const std::uint64_t index = tree.index(id, layer);
    if (create) {
      node = child_or_create(tree, node, layer, index);
    } else {
      const std::uint64_t v = load_slot(node, index);
      if (v == 0) return nullptr;
      node = as_node(v);
    }
  }
  return &node[tree.index(id, tree.layers - 1)];
}

SortIndex::InsertResult SortIndex::insert(VertexId id, Offset offset) {
  check_id(id);
  if (offset % 2 != 0) raise(ErrorCode::invalid_argument, "offsets must be even");
  std::shared_lock lock(adapt_mutex_);
  Tree* tree = tree_.load(std::memory_order_acquire);
  std::atomic_ref<std::uint64_t> slot(*leaf_slot(*tree, id, true));
  std::uint64_t expected = 0;
  if (slot.compare_exchange_strong(expected, encode_leaf(offset), std::memory_order_acq_rel)) return {true, offset};
  return {false, decode_leaf(expected)};
}

std::optional<Offset> SortIndex::lookup(VertexId id) const {
  lookups_.fetch_add(1, std::memory_order_relaxed);
  if (bits_ < 64 && (id >> bits_) != 0) return std::nullopt;
  const Tree* tree = tree_.load(std::memory_order_acquire);
  std::uint64_t* node = tree->root;
  for (unsigned layer = 0; layer + 1 < tree->layers; ++layer) {
    const std::uint64_t v = load_slot(node, tree->index(id, layer));
    if (v == 0) return std::nullopt;
    node = as_node(v);
  }
  const std::uint64_t v = load_slot(node, tree->index(id, tree->layers - 1));
  if (v == 0) return std::nullopt;
  return decode_leaf(v);
}

bool SortIndex::remove(VertexId id) {
  if (bits_ < 64 && (id >> bits_) != 0) return false;
  std::shared_lock lock(adapt_mutex_);
  std::uint64_t* slot = leaf_slot(*tree_.load(std::memory_order_acquire), id, false);
  if (slot == nullptr) return false;
  return std::atomic_ref<std::uint64_t>(*slot).exchange(0, std::memory_order_acq_rel) != 0;
}

bool SortIndex::remove_if(VertexId id, Offset expected) {
  if (bits_ < 64 && (id >> bits_) != 0) return false;
  std::shared_lock lock(adapt_mutex_);
  std::uint64_t* slot = leaf_slot(*tree_.load(std::memory_order_acquire), id, false);
  if (slot == nullptr) return false;
  std::uint64_t current = encode_leaf(expected);
  return std::atomic_ref<std::uint64_t>(*slot).compare_exchange_strong(current, 0, std::memory_order_acq_rel);
}

bool SortIndex::replace(VertexId id, Offset expected, Offset desired) {
  check_id(id);
  if (desired % 2 != 0) raise(ErrorCode::invalid_argument, "offsets must be even");
  std::shared_lock lock(adapt_mutex_);
  std::uint64_t* slot = leaf_slot(*tree_.load(std::memory_order_acquire), id, true);
  std::uint64_t current = encode_leaf(expected);
  return std::atomic_ref<std::uint64_t>(*slot).compare_exchange_strong(current, encode_leaf(desired),
                                                                       std::memory_order_acq_rel);
}

RetiredNodes SortIndex::adapt(const FanoutConfig& config, AdaptStats* stats) {
  if (config.bits() != bits_)
    raise(ErrorCode::invalid_argument, "configuration " + config.to_string() + " does not span " + std::to_string(bits_) + " bits");
  std::unique_lock lock(adapt_mutex_);
  Tree* old = tree_.load(std::memory_order_acquire);
  std::unique_ptr<Tree> fresh(make_tree(config));

  const unsigned lo = old->layers;
  const unsigned ln = fresh->layers;
  unsigned k = 0;
  while (k < lo && k < ln && old->fanout[lo - 1 - k] == fresh->fanout[ln - 1 - k]) ++k;

  AdaptStats local;
  local.reused_layers = k;
  RetiredNodes retired;

  if (k == lo && k == ln) {
    // Identical shape: keep every node, including the root.
    free_node(fresh->root);
    fresh->root = old->root;
    for (unsigned i = 0; i < ln; ++i) fresh->nodes[i].store(old->nodes[i].load(std::memory_order_relaxed), std::memory_order_relaxed);
    local.reused_subtrees = 1;
  } else if (k > 0) {
    // Old layer lo-k subtrees become new layer ln-k subtrees; only the
    // layers above them are rebuilt.
    const unsigned boundary = lo - k;
    const unsigned new_boundary = ln - k;
    const unsigned prefix_bits = old->config.prefix_sums()[boundary - 1];
    const auto new_prefix = fresh->config.prefix_sums();
    retired.nodes_.push_back(old->root);
    struct {
      SortIndex* self;
      Tree* fresh;
      RetiredNodes* retired;
      unsigned boundary, new_boundary, prefix_bits;
      std::span<const unsigned> new_prefix;
      std::uint64_t moved = 0;
      void leaf(std::uint64_t, Offset) {}
      bool child(std::uint64_t* node, unsigned layer, std::uint64_t key) {
        if (layer < boundary) {
          retired->nodes_.push_back(node);
          return true;
        }
        std::uint64_t* target = fresh->root;
        for (unsigned i = 0; i + 1 < new_boundary; ++i) {
          const std::uint64_t index = (key >> (prefix_bits - new_prefix[i])) & (fresh->slots(i) - 1);
          target = self->child_or_create(*fresh, target, i, index);
        }
        const std::uint64_t index = key & (fresh->slots(new_boundary - 1) - 1);
        std::atomic_ref<std::uint64_t>(target[index]).store(reinterpret_cast<std::uint64_t>(node), std::memory_order_release);
        ++moved;
        return false;
      }
    } rehome{this, fresh.get(), &retired, boundary, new_boundary, prefix_bits, new_prefix};
    walk(old->root, 0, old->fanout, 0, rehome);
    local.reused_subtrees = rehome.moved;
    for (unsigned d = 0; d < k; ++d)
      fresh->nodes[new_boundary + d].store(old->nodes[boundary + d].load(std::memory_order_relaxed), std::memory_order_relaxed);
  } else {
    // No shared suffix: rebuild from the stored bindings.
    retired.nodes_.push_back(old->root);
    struct {
      SortIndex* self;
      Tree* fresh;
      RetiredNodes* retired;
      void leaf(std::uint64_t key, Offset offset) {
        std::atomic_ref<std::uint64_t>(*self->leaf_slot(*fresh, key, true)).store(encode_leaf(offset), std::memory_order_release);
      }
      bool child(std::uint64_t* node, unsigned, std::uint64_t) {
        retired->nodes_.push_back(node);
        return true;
      }
    } rebuild{this, fresh.get(), &retired};
    walk(old->root, 0, old->fanout, 0, rebuild);
  }

  for (unsigned i = 0; i < ln - (k == ln ? ln : k); ++i) local.rebuilt_nodes += fresh->nodes[i].load(std::memory_order_relaxed);
  retired.state_ = new RetiredNodes::State{std::unique_ptr<Tree>(old)};
  tree_.store(fresh.release(), std::memory_order_release);
  if (stats != nullptr) *stats = local;
  return retired;
}

FanoutConfig SortIndex::config() const { return tree_.load(std::memory_order_acquire)->config; }

std::uint64_t SortIndex::slot_count() const {
  const Tree* tree = tree_.load(std::memory_order_acquire);
  std::uint64_t total = 0;
  for (unsigned i = 0; i < tree->layers; ++i) total += tree->nodes[i].load(std::memory_order_relaxed) << tree->fanout[i];
  return total;
}

std::uint64_t SortIndex::node_count() const {
  const Tree* tree = tree_.load(std::memory_order_acquire);
  std::uint64_t total = 0;
  for (unsigned i = 0; i < tree->layers; ++i) total += tree->nodes[i].load(std::memory_order_relaxed);
  return total;
}

std::uint64_t SortIndex::recount_slots() const {
  const Tree* tree = tree_.load(std::memory_order_acquire);
  struct {
    const std::vector<unsigned>* fanout;
    std::uint64_t total = 0;
    void leaf(std::uint64_t, Offset) {}
    bool child(std::uint64_t*, unsigned layer, std::uint64_t) {
      total += std::uint64_t{1} << (*fanout)[layer];
      return true;
    }
  } count{&tree->fanout};
  count.total = tree->slots(0);
  walk(tree->root, 0, tree->fanout, 0, count);
  return count.total;
}

void SortIndex::for_each(const std::function<void(VertexId, Offset)>& visit) const {
  const Tree* tree = tree_.load(std::memory_order_acquire);
  struct {
    const std::function<void(VertexId, Offset)>* visit;
    void leaf(std::uint64_t key, Offset offset) { (*visit)(key, offset); }
    bool child(std::uint64_t*, unsigned, std::uint64_t) { return true; }
  } visitor{&visit};
  walk(tree->root, 0, tree->fanout, 0, visitor);
}

}  // namespace sortgraph
