#include "sortgraph/graph_store.hpp"

#include <algorithm>
#include <cmath>

#include "sortgraph/error.hpp"

namespace sortgraph {

namespace {

template <class T>
inline std::atomic_ref<T> ref(T& field) {
  return std::atomic_ref<T>(field);
}

FanoutConfig initial_config(const GraphOptions& options) {
  if (options.initial_config) {
    if (options.initial_config->bits() != options.bits)
      raise(ErrorCode::invalid_argument, "initial configuration does not span the identifier bits");
    return *options.initial_config;
  }
  UniverseSpec spec{options.bits, std::max<std::uint64_t>(options.expected_vertices, 1), options.layers};
  if (options.bits < 64) spec.count = std::min<std::uint64_t>(spec.count, std::uint64_t{1} << options.bits);
  return optimize(spec);
}

void validate_weight(Weight weight) {
  if (std::isnan(weight)) raise(ErrorCode::invalid_argument, "edge weight is NaN");
  if (weight == kTombstone) raise(ErrorCode::zero_weight, "edge weight must be nonzero");
}

}  // namespace

// ---------------------------------------------------------------------------
// Snapshot

Snapshot::Snapshot(const GraphStore& graph, std::unique_ptr<ActivityRegistry::ReaderPin> pin)
    : graph_(&graph), pin_(std::move(pin)), t_(pin_->timestamp()) {}

void Snapshot::release() {
  if (pin_ == nullptr) raise(ErrorCode::double_release, "snapshot already released");
  pin_.reset();
}

void Snapshot::check_live() const {
  if (pin_ == nullptr) raise(ErrorCode::invalid_argument, "snapshot was released");
}

bool Snapshot::contains(VertexId id) const {
  check_live();
  ActivityRegistry::Scope scope(graph_->registry_);
  return graph_->resolve(id, t_).has_value();
}

std::vector<Neighbor> Snapshot::neighbors(VertexId id) const {
  check_live();
  ActivityRegistry::Scope scope(graph_->registry_);
  const auto offset = graph_->resolve(id, t_);
  if (!offset) raise(ErrorCode::not_visible, "vertex " + std::to_string(id) + " is not visible at " + std::to_string(t_));
  std::vector<Neighbor> out;
  graph_->read_neighbors(*offset, t_, out);
  return out;
}

std::optional<Offset> Snapshot::resolve(VertexId id) const {
  check_live();
  ActivityRegistry::Scope scope(graph_->registry_);
  return graph_->resolve(id, t_);
}

void Snapshot::neighbors_of(Offset vertex, std::vector<OffsetNeighbor>& out) const {
  check_live();
  ActivityRegistry::Scope scope(graph_->registry_);
  graph_->edges_.neighbors(vertex, t_, out);
}

std::vector<Offset> Snapshot::vertices() const {
  check_live();
  ActivityRegistry::Scope scope(graph_->registry_);
  std::vector<Offset> out;
  const std::uint64_t bound = graph_->table_.logical_bound();
  for (std::uint64_t i = 0; i < bound; ++i)
    if (graph_->visible(offset_of(i), t_)) out.push_back(offset_of(i));
  return out;
}

VertexId Snapshot::id_of(Offset vertex) const {
  return ref(graph_->table_.block(vertex).id).load(std::memory_order_acquire);
}

std::uint64_t Snapshot::logical_bound() const { return graph_->table_.logical_bound(); }

// ---------------------------------------------------------------------------
// GraphStore

GraphStore::GraphStore(GraphOptions options)
    : options_(std::move(options)),
      registry_(options_.registry_entries),
      table_(options_.initial_segment_blocks),
      edges_(table_, registry_, EdgeStoreOptions{options_.bitmap_segment_bits, options_.audit_checker}),
      index_(std::make_unique<SortIndex>(initial_config(options_))) {
  optimized_for_.store(std::max<std::uint64_t>(options_.expected_vertices, 1));
  // Truncated edge chains report snapshot_too_old on their own, so the
  // collection that follows compaction leaves the history floor alone.
  if (!options_.retain_history) edges_.set_horizon_source([this] { return registry_.reader_horizon(); });
  if (options_.reoptimize == ReoptimizeMode::background) worker_ = std::thread([this] { worker_loop(); });
}

GraphStore::~GraphStore() {
  if (worker_.joinable()) {
    {
      std::lock_guard lock(worker_mutex_);
      worker_stop_ = true;
    }
    worker_cv_.notify_all();
    worker_.join();
  }
}

void GraphStore::notify(MutationKind kind, VertexId src, VertexId dst, Weight weight, Timestamp t) const {
  if (observer_) observer_(Mutation{kind, src, dst, weight, t});
}

void GraphStore::raise_history_floor(Timestamp floor) const {
  Timestamp current = history_floor_.load(std::memory_order_seq_cst);
  while (current < floor && !history_floor_.compare_exchange_weak(current, floor, std::memory_order_seq_cst)) {
  }
}

Timestamp GraphStore::reclaim_horizon() const {
  // Publish the floor before trusting the horizon: a reader that registers
  // an old timestamp either sees the new floor or is seen by the rescan.
  const Timestamp first = registry_.reader_horizon();
  raise_history_floor(first);
  return std::min(first, registry_.reader_horizon());
}

Timestamp GraphStore::recycle_horizon() const {
  // Only history up to the oldest free slot's deletion is given up, and
  // only slots deleted no later than that become eligible.
  const auto del = table_.oldest_free_deletion();
  if (!del || *del >= registry_.reader_horizon()) return 0;
  raise_history_floor(*del + 1);
  return *del < registry_.reader_horizon() ? *del + 1 : 0;
}

void GraphStore::check_history(Timestamp t) const {
  if (t < history_floor_.load(std::memory_order_seq_cst))
    raise(ErrorCode::snapshot_too_old, "history before timestamp " + std::to_string(history_floor_.load()) + " may have been reclaimed");
}

Timestamp GraphStore::wait_until_stable(Timestamp t) const {
  if (t > registry_.clock()) raise(ErrorCode::out_of_range, "timestamp " + std::to_string(t) + " lies in the future");
  while (registry_.stable_now() < t) std::this_thread::yield();
  return t;
}

bool GraphStore::visible(Offset vertex, Timestamp t) const {
  VertexBlock* b = table_.try_block(vertex);
  if (b == nullptr) return false;
  const std::uint32_t created = ref(table_.meta(vertex).created_at).load(std::memory_order_acquire);
  if (created == kNeverCreated || created > t) return false;
  const Timestamp del = effective_del_time(ref(b->del_time).load(std::memory_order_acquire));
  return del == 0 || t <= del;
}

std::optional<Offset> GraphStore::resolve(VertexId id, Timestamp t) const {
  const auto bound = index_->lookup(id);
  if (!bound) return std::nullopt;
  Offset offset = *bound;
  std::uint64_t newer = std::uint64_t{kNeverCreated} + 1;
  for (;;) {
    VertexBlock* b = table_.try_block(offset);
    if (b == nullptr) return std::nullopt;
    const VertexMeta& m = table_.meta(offset);
    const std::uint32_t created = ref(const_cast<std::uint32_t&>(m.created_at)).load(std::memory_order_acquire);
    if (ref(b->id).load(std::memory_order_acquire) != id) return std::nullopt;
    if (created == kNeverCreated || created >= newer) return std::nullopt;
    if (created <= t) {
      const Timestamp del = effective_del_time(ref(b->del_time).load(std::memory_order_acquire));
      if (del != 0 && del < t) return std::nullopt;
      return offset;
    }
    const std::uint32_t prev = ref(const_cast<std::uint32_t&>(m.prev_incarnation)).load(std::memory_order_acquire);
    if (prev == 0) return std::nullopt;
    newer = created;
    offset = offset_of(prev - 1);
  }
}

Offset GraphStore::ensure_vertex(ActivityRegistry::Scope& scope, VertexId id, bool& created) {
  for (;;) {
    const auto current = index_->lookup(id);
    std::optional<Offset> prev_link;
    if (current) {
      VertexBlock& b = table_.block(*current);
      const std::uint32_t c = ref(table_.meta(*current).created_at).load(std::memory_order_acquire);
      if (ref(b.id).load(std::memory_order_acquire) == id && c != kNeverCreated) {
        if (effective_del_time(ref(b.del_time).load(std::memory_order_acquire)) == 0) return *current;
        prev_link = *current;
      }
    }

    const Timestamp t = scope.begin_write();
    VertexTable::RecyclePolicy policy;
    if (options_.retain_history) {
      policy.horizon = 0;
    } else if (table_.has_free_slots()) {
      policy.horizon = recycle_horizon();
      policy.min_active_epoch = registry_.min_active_epoch();
    }
    const VertexTable::Allocation slot = table_.allocate(id, t, policy, prev_link);

    bool bound;
    if (slot.recycled) {
      edges_.retire_chain(slot.offset, slot.previous_edges);
      if (current && *current == slot.offset) {
        // Reusing the id's own slot: unbind and rebind so that a concurrent
        // creator of the same id cannot also succeed.
        bound = index_->remove_if(id, slot.offset) && index_->insert(id, slot.offset).inserted;
      } else {
        index_->remove_if(slot.previous_id, slot.offset);
        bound = current ? index_->replace(id, *current, slot.offset) : index_->insert(id, slot.offset).inserted;
      }
    } else {
      bound = current ? index_->replace(id, *current, slot.offset) : index_->insert(id, slot.offset).inserted;
    }
    if (!bound) {
      table_.abandon(slot.offset, registry_.retire_stamp());
      scope.end_write();
      continue;
    }
    live_vertices_.fetch_add(1, std::memory_order_relaxed);
    notify(MutationKind::insert_vertex, id, 0, 0.0f, t);
    created = true;
    return slot.offset;
  }
}

Offset GraphStore::require_live(VertexId id) const {
  const auto current = index_->lookup(id);
  if (current) {
    VertexBlock& b = table_.block(*current);
    const std::uint32_t c = ref(table_.meta(*current).created_at).load(std::memory_order_acquire);
    if (ref(b.id).load(std::memory_order_acquire) == id && c != kNeverCreated &&
        effective_del_time(ref(b.del_time).load(std::memory_order_acquire)) == 0)
      return *current;
  }
  raise(ErrorCode::not_found, "vertex " + std::to_string(id) + " does not exist");
}

bool GraphStore::alive_at(Offset vertex, Timestamp t) const {
  VertexBlock& b = table_.block(vertex);
  for (;;) {
    const std::uint32_t raw = ref(b.del_time).load(std::memory_order_seq_cst);
    // A claimed deletion is stamped shortly; its timestamp decides.
    if (raw == kDeleting) {
      std::this_thread::yield();
      continue;
    }
    return raw == 0 || raw > t;
  }
}

Offset GraphStore::insert_vertex(VertexId id) {
  bool created = false;
  Offset offset;
  {
    ActivityRegistry::Scope scope(registry_);
    offset = ensure_vertex(scope, id, created);
  }
  if (created) maybe_reoptimize();
  return offset;
}

void GraphStore::delete_vertex(VertexId id) {
  ActivityRegistry::Scope scope(registry_);
  const auto current = index_->lookup(id);
  if (!current) raise(ErrorCode::not_found, "vertex " + std::to_string(id) + " does not exist");
  VertexBlock& b = table_.block(*current);
  const std::uint32_t c = ref(table_.meta(*current).created_at).load(std::memory_order_acquire);
  if (ref(b.id).load(std::memory_order_acquire) != id || c == kNeverCreated)
    raise(ErrorCode::not_found, "vertex " + std::to_string(id) + " does not exist");
  table_.begin_tombstone(*current);
  const Timestamp t = scope.begin_write();
  table_.finish_tombstone(*current, t, registry_.retire_stamp());
  live_vertices_.fetch_sub(1, std::memory_order_relaxed);
  notify(MutationKind::delete_vertex, id, 0, 0.0f, t);
}

void GraphStore::write_edge(MutationKind kind, VertexId src, VertexId dst, Weight weight) {
  const bool upsert = kind == MutationKind::insert_edge;
  if (kind != MutationKind::delete_edge) validate_weight(weight);
  const Weight stored = kind == MutationKind::delete_edge ? kTombstone : weight;
  bool created = false;
  {
    ActivityRegistry::Scope scope(registry_);
    for (;;) {
      Offset s, d;
      if (upsert) {
        s = ensure_vertex(scope, src, created);
        d = ensure_vertex(scope, dst, created);
      } else {
        s = require_live(src);
        d = require_live(dst);
      }
      Timestamp t;
      try {
        t = edges_.append(s, d, stored, scope);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::vertex_deleted) throw;
        if (upsert) continue;
        raise(ErrorCode::not_found, "edge endpoint was deleted");
      }
      // An endpoint deleted before t makes the entry unreachable; the
      // operation then takes effect against the current incarnations.
      if (!alive_at(s, t) || !alive_at(d, t)) {
        scope.end_write();
        if (upsert) continue;
        raise(ErrorCode::not_found, "edge endpoint was deleted");
      }
      notify(kind, src, dst, kind == MutationKind::delete_edge ? kTombstone : weight, t);
      break;
    }
  }
  if (created) maybe_reoptimize();
}

void GraphStore::insert_edge(VertexId src, VertexId dst, Weight weight) { write_edge(MutationKind::insert_edge, src, dst, weight); }
void GraphStore::update_edge(VertexId src, VertexId dst, Weight weight) { write_edge(MutationKind::update_edge, src, dst, weight); }
void GraphStore::delete_edge(VertexId src, VertexId dst) { write_edge(MutationKind::delete_edge, src, dst, kTombstone); }

void GraphStore::read_neighbors(Offset vertex, Timestamp t, std::vector<Neighbor>& out) const {
  thread_local std::vector<OffsetNeighbor> raw;
  edges_.neighbors(vertex, t, raw);
  out.clear();
  out.reserve(raw.size());
  for (const OffsetNeighbor& n : raw) out.push_back({ref(table_.block(n.offset).id).load(std::memory_order_acquire), n.weight});
}

std::vector<Neighbor> GraphStore::get_neighbors(VertexId id) const {
  ActivityRegistry::Scope scope(registry_, ActivityRegistry::Scope::read_now);
  const Timestamp t = scope.read_timestamp();
  const auto offset = resolve(id, t);
  if (!offset) raise(ErrorCode::not_visible, "vertex " + std::to_string(id) + " is not visible at " + std::to_string(t));
  std::vector<Neighbor> out;
  read_neighbors(*offset, t, out);
  return out;
}

std::vector<Neighbor> GraphStore::get_neighbors(VertexId id, Timestamp t) const {
  wait_until_stable(t);
  ActivityRegistry::Scope scope(registry_, t);
  check_history(t);
  const auto offset = resolve(id, t);
  if (!offset) raise(ErrorCode::not_visible, "vertex " + std::to_string(id) + " is not visible at " + std::to_string(t));
  std::vector<Neighbor> out;
  read_neighbors(*offset, t, out);
  return out;
}

bool GraphStore::has_vertex(VertexId id) const {
  ActivityRegistry::Scope scope(registry_, ActivityRegistry::Scope::read_now);
  return resolve(id, scope.read_timestamp()).has_value();
}

bool GraphStore::has_vertex(VertexId id, Timestamp t) const {
  wait_until_stable(t);
  ActivityRegistry::Scope scope(registry_, t);
  check_history(t);
  return resolve(id, t).has_value();
}

Snapshot GraphStore::snapshot() const {
  return Snapshot(*this, std::make_unique<ActivityRegistry::ReaderPin>(registry_));
}

Snapshot GraphStore::snapshot_at(Timestamp t) const {
  wait_until_stable(t);
  auto pin = std::make_unique<ActivityRegistry::ReaderPin>(registry_, t);
  check_history(t);
  return Snapshot(*this, std::move(pin));
}

FanoutConfig GraphStore::config() const {
  std::lock_guard lock(const_cast<std::mutex&>(adapt_mutex_));
  return index_->config();
}

bool GraphStore::reoptimize_for(std::uint64_t n) {
  std::lock_guard lock(adapt_mutex_);
  UniverseSpec spec{options_.bits, std::max<std::uint64_t>(n, 1), options_.layers};
  if (options_.bits < 64) spec.count = std::min<std::uint64_t>(spec.count, std::uint64_t{1} << options_.bits);
  const FanoutConfig next = optimize(spec);
  if (next == index_->config()) return false;
  auto retired = std::make_unique<RetiredNodes>(index_->adapt(next));
  registry_.retire(retired.release());
  reoptimizations_.fetch_add(1, std::memory_order_relaxed);
  return true;
}

bool GraphStore::reoptimize() {
  const std::uint64_t n = std::max<std::uint64_t>(vertex_count(), 1);
  optimized_for_.store(n);
  return reoptimize_for(n);
}

void GraphStore::maybe_reoptimize() {
  if (options_.reoptimize == ReoptimizeMode::disabled) return;
  const std::uint64_t n = vertex_count();
  std::uint64_t last = optimized_for_.load(std::memory_order_relaxed);
  if (n < 2 * last) return;
  if (!optimized_for_.compare_exchange_strong(last, n)) return;
  if (options_.reoptimize == ReoptimizeMode::synchronous) {
    reoptimize_for(n);
    return;
  }
  {
    std::lock_guard lock(worker_mutex_);
    worker_request_ = std::max(worker_request_, n);
  }
  worker_cv_.notify_all();
}

void GraphStore::worker_loop() {
  std::unique_lock lock(worker_mutex_);
  for (;;) {
    worker_cv_.wait(lock, [&] { return worker_stop_ || worker_request_ != 0; });
    if (worker_stop_) return;
    const std::uint64_t n = std::exchange(worker_request_, 0);
    worker_busy_ = true;
    lock.unlock();
    reoptimize_for(n);
    lock.lock();
    worker_busy_ = false;
    worker_cv_.notify_all();
  }
}

void GraphStore::wait_for_reoptimization() {
  if (!worker_.joinable()) return;
  std::unique_lock lock(worker_mutex_);
  worker_cv_.wait(lock, [&] { return worker_request_ == 0 && !worker_busy_; });
}

std::size_t GraphStore::collect_garbage() {
  std::size_t reclaimed = 0;
  if (!options_.retain_history) {
    const Timestamp horizon = reclaim_horizon();
    const std::uint64_t bound = table_.logical_bound();
    for (std::uint64_t i = 0; i < bound; ++i)
      if (table_.try_block(offset_of(i)) != nullptr) reclaimed += edges_.gc_versions(offset_of(i), horizon);
  }
  registry_.reclaim();
  return reclaimed;
}

StorageStats GraphStore::storage_stats() const {
  StorageStats s;
  s.index_slots = index_->slot_count();
  s.index_nodes = index_->node_count();
  s.vertex_blocks = table_.allocated_blocks();
  s.vertex_capacity_blocks = table_.capacity_blocks();
  s.live_vertices = vertex_count();
  const EdgeStoreStats e = edges_.stats();
  s.edge_versions = e.versions;
  s.snapshot_blocks = e.snapshot_blocks;
  s.log_slots = e.log_slots;
  return s;
}

StorageStats GraphStore::audit_storage() const {
  StorageStats s;
  s.index_slots = index_->recount_slots();
  s.index_nodes = index_->node_count();
  s.vertex_blocks = table_.allocated_blocks();
  s.vertex_capacity_blocks = table_.capacity_blocks();
  const Timestamp t = registry_.stable_now();
  for (std::uint64_t i = 0; i < table_.logical_bound(); ++i) {
    VertexBlock* b = table_.try_block(offset_of(i));
    if (b == nullptr) continue;
    const std::uint32_t created = ref(table_.meta(offset_of(i)).created_at).load(std::memory_order_acquire);
    if (created != kNeverCreated && created <= t && effective_del_time(ref(b->del_time).load()) == 0) ++s.live_vertices;
  }
  const EdgeStoreStats e = edges_.audit();
  s.edge_versions = e.versions;
  s.snapshot_blocks = e.snapshot_blocks;
  s.log_slots = e.log_slots;
  return s;
}

}  // namespace sortgraph
