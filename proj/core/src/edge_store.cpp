#include "sortgraph/edge_store.hpp"

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <thread>

#include "sortgraph/error.hpp"

namespace sortgraph {

namespace {

template <class T>
inline std::atomic_ref<T> ref(T& field) {
  return std::atomic_ref<T>(field);
}

std::atomic<std::uint64_t> next_store_id{1};

inline void backoff(unsigned& spins) {
  if (++spins > 32) std::this_thread::yield();
}

}  // namespace

EdgeStore::EdgeStore(VertexTable& table, ActivityRegistry& registry, EdgeStoreOptions options)
    : table_(table), registry_(registry), options_(options), store_id_(next_store_id.fetch_add(1)) {
  if (options_.bitmap_segment_bits == 0) raise(ErrorCode::invalid_argument, "bitmap segment length must be positive");
}

EdgeStore::~EdgeStore() {
  const std::uint64_t bound = table_.logical_bound();
  for (std::uint64_t i = 0; i < bound; ++i) {
    VertexBlock* b = table_.try_block(offset_of(i));
    if (b == nullptr) continue;
    EdgeVersion* v = ref(b->edges).load(std::memory_order_acquire);
    ref(b->edges).store(nullptr, std::memory_order_release);
    while (v != nullptr) {
      EdgeVersion* prev = v->prev;
      std::free(v);
      v = prev;
    }
  }
}

SegmentedBitmap& EdgeStore::local_checker() const {
  thread_local struct {
    std::uint64_t owner = 0;
    std::unique_ptr<SegmentedBitmap> bitmap;
  } cache;
  if (cache.owner != store_id_ || !cache.bitmap) {
    cache.bitmap = std::make_unique<SegmentedBitmap>(options_.bitmap_segment_bits);
    cache.owner = store_id_;
  }
  return *cache.bitmap;
}

EdgeVersion* EdgeStore::allocate_version(std::uint32_t deg, std::uint32_t cap) {
  const std::size_t bytes = sizeof(EdgeVersion) + std::size_t{deg} * sizeof(EdgeBlock) +
                            std::size_t{cap - deg} * sizeof(LogBlock);
  void* p = std::calloc(1, bytes);
  if (p == nullptr) raise(ErrorCode::allocation_failure, "cannot allocate an edge array of " + std::to_string(cap) + " blocks");
  auto* v = static_cast<EdgeVersion*>(p);
  v->deg = deg;
  v->cap = cap;
  return v;
}

void EdgeStore::retire_version(EdgeVersion* version) {
  versions_.fetch_sub(1, std::memory_order_relaxed);
  snapshot_blocks_.fetch_sub(version->deg, std::memory_order_relaxed);
  log_slots_.fetch_sub(version->log_capacity(), std::memory_order_relaxed);
  registry_.retire(version, [](void* p) { std::free(p); });
}

void EdgeStore::retire_chain(Offset vertex, EdgeVersion* head) {
  // Serialized with gc_versions, which may be truncating the same chain.
  std::lock_guard lock(stripe(vertex));
  while (head != nullptr) {
    EdgeVersion* prev = ref(head->prev).load(std::memory_order_acquire);
    retire_version(head);
    head = prev;
  }
}

Timestamp EdgeStore::append(Offset vertex, Offset dst, Weight weight, ActivityRegistry::Scope& scope) {
  if (dst > kMaxOffset || dst % kVertexBlockBytes != 0)
    raise(ErrorCode::out_of_range, "destination offset " + std::to_string(dst) + " is not a vertex block");
  VertexBlock& block = table_.block(vertex);
  const std::uint32_t del = ref(block.del_time).load(std::memory_order_acquire);
  if (effective_del_time(del) != 0)
    raise(ErrorCode::vertex_deleted, "vertex at offset " + std::to_string(vertex) + " is deleted");

  for (;;) {
    const std::uint64_t state = ref(block.state).fetch_add(1, std::memory_order_seq_cst);
    const std::uint32_t cap = state_cap(state);
    const std::uint32_t s = state_size(state);
    if (s < cap) {
      EdgeVersion* v = ref(block.edges).load(std::memory_order_acquire);
      LogBlock& slot = v->log()[s - v->deg];
      slot.dst = static_cast<std::uint32_t>(dst);
      slot.weight = weight;
      const Timestamp t = scope.begin_write();
      ref(slot.time).store(static_cast<std::uint32_t>(t), std::memory_order_release);
      if (s + 1 == cap) compact(vertex, block);
      return t;
    }
    if (cap == 0 && s == 0) {
      Timestamp t = 0;
      bootstrap(block, vertex, dst, weight, scope, t);
      return t;
    }
    // The array is full and another writer is compacting (or bootstrapping).
    unsigned spins = 0;
    for (;;) {
      const std::uint64_t now = ref(block.state).load(std::memory_order_acquire);
      if (state_cap(now) != cap || state_size(now) < s) break;
      backoff(spins);
    }
  }
}

void EdgeStore::bootstrap(VertexBlock& block, Offset vertex, Offset dst, Weight weight, ActivityRegistry::Scope& scope,
                          Timestamp& out_time) {
  constexpr std::uint32_t kBootstrapCap = 4;
  std::unique_lock lock(stripe(vertex));
  EdgeVersion* previous = ref(block.edges).load(std::memory_order_acquire);
  EdgeVersion* fresh = allocate_version(0, kBootstrapCap);
  if (previous != nullptr) {
    // Replaces an empty header-only version; it stands for the same history.
    fresh->created_at = previous->created_at;
    fresh->prev = ref(previous->prev).load(std::memory_order_acquire);
    fresh->history_truncated = ref(previous->history_truncated).load(std::memory_order_acquire);
  } else {
    fresh->created_at = ref(table_.meta(vertex).created_at).load(std::memory_order_acquire);
  }
  const Timestamp t = scope.begin_write();
  LogBlock& slot = fresh->log()[0];
  slot.dst = static_cast<std::uint32_t>(dst);
  slot.weight = weight;
  slot.time = static_cast<std::uint32_t>(t);

  ref(block.edges).store(fresh, std::memory_order_release);
  ref(block.deg).store(0, std::memory_order_release);
  ref(block.state).store(pack_state(1, kBootstrapCap), std::memory_order_seq_cst);
  versions_.fetch_add(1, std::memory_order_relaxed);
  log_slots_.fetch_add(kBootstrapCap, std::memory_order_relaxed);
  bootstraps_.fetch_add(1, std::memory_order_relaxed);
  if (previous != nullptr) retire_version(previous);
  out_time = t;
}

bool EdgeStore::gather(EdgeVersion* version, Timestamp limit, std::vector<Entry>& out) const {
  out.clear();
  const std::uint32_t created = version->created_at;
  const EdgeBlock* snap = version->snapshot();
  for (std::uint32_t i = 0; i < version->deg; ++i) out.push_back({snap[i].dst, snap[i].weight, created});
  LogBlock* log = version->log();
  bool ordered = true;
  std::uint32_t last = created;
  for (std::uint32_t i = 0; i < version->log_capacity(); ++i) {
    const std::uint32_t time = ref(log[i].time).load(std::memory_order_acquire);
    if (time == 0 || time > limit) continue;
    out.push_back({log[i].dst, log[i].weight, time});
    if (time < last) ordered = false;
    last = time;
  }
  // Timestamps are drawn after slot reservation, so concurrent appenders can
  // publish out of slot order.
  if (!ordered) std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.time < b.time; });
  return !ordered;
}

bool EdgeStore::keep_destination(std::uint32_t dst, std::uint32_t entry_time, Timestamp cutoff) const {
  VertexBlock* b = table_.try_block(dst);
  if (b == nullptr) return false;
  const std::uint32_t created = ref(table_.meta(dst).created_at).load(std::memory_order_acquire);
  if (created == kNeverCreated || entry_time < created) return false;
  const Timestamp del = effective_del_time(ref(b->del_time).load(std::memory_order_acquire));
  return del == 0 || del >= cutoff;
}

void EdgeStore::compact(Offset vertex, VertexBlock& block) {
  std::unique_lock lock(stripe(vertex));
  EdgeVersion* old = ref(block.edges).load(std::memory_order_acquire);
  LogBlock* log = old->log();
  for (std::uint32_t i = 0; i < old->log_capacity(); ++i) {
    unsigned spins = 0;
    while (ref(log[i].time).load(std::memory_order_acquire) == 0) backoff(spins);
  }

  std::vector<Entry> entries;
  entries.reserve(old->cap);
  const bool reordered = gather(old, kMaxTimestamp, entries);
  Timestamp created = old->created_at;
  for (const Entry& e : entries) created = std::max<Timestamp>(created, e.time);

  SegmentedBitmap& checker = local_checker();
  checker.reserve_vertices(table_.logical_bound());
  std::vector<EdgeBlock> survivors;
  survivors.reserve(entries.size());
  for (std::size_t i = entries.size(); i-- > 0;) {
    const Entry& e = entries[i];
    if (checker.test_and_mark(e.dst)) continue;
    if (e.weight != kTombstone && keep_destination(e.dst, e.time, created)) survivors.push_back({e.dst, e.weight});
  }
  for (const Entry& e : entries) checker.clear(e.dst);

  CompactionEvent event;
  event.vertex = vertex;
  event.scanned = static_cast<std::uint32_t>(entries.size());
  event.reordered = reordered;
  if (options_.audit_checker) {
    event.checker_clean = checker.all_zero();
    if (!event.checker_clean) dirty_scans_.fetch_add(1, std::memory_order_relaxed);
  }

  const auto cnt = static_cast<std::uint32_t>(survivors.size());
  EdgeVersion* fresh = allocate_version(cnt, 2 * cnt);
  fresh->created_at = static_cast<std::uint32_t>(created);
  fresh->prev = old;
  std::copy(survivors.begin(), survivors.end(), fresh->snapshot());

  ref(block.edges).store(fresh, std::memory_order_release);
  ref(block.deg).store(cnt, std::memory_order_release);
  ref(block.state).store(pack_state(cnt, 2 * cnt), std::memory_order_seq_cst);

  compactions_.fetch_add(1, std::memory_order_relaxed);
  blocks_visited_.fetch_add(event.scanned, std::memory_order_relaxed);
  if (reordered) reordered_.fetch_add(1, std::memory_order_relaxed);
  versions_.fetch_add(1, std::memory_order_relaxed);
  snapshot_blocks_.fetch_add(cnt, std::memory_order_relaxed);
  log_slots_.fetch_add(cnt, std::memory_order_relaxed);
  const bool long_chain = ref(old->prev).load(std::memory_order_acquire) != nullptr;
  lock.unlock();

  event.survivors = cnt;
  event.deg = cnt;
  event.size = cnt;
  event.cap = 2 * cnt;
  event.array_freed = cnt == 0;
  event.created_at = created;
  if (observer_) observer_(event);
  if (horizon_ && long_chain) gc_versions(vertex, horizon_());
}

void EdgeStore::neighbors(Offset vertex, Timestamp t, std::vector<OffsetNeighbor>& out) const {
  out.clear();
  VertexBlock* block = table_.try_block(vertex);
  if (block == nullptr) raise(ErrorCode::out_of_range, "offset " + std::to_string(vertex) + " was never allocated");
  EdgeVersion* v = ref(block->edges).load(std::memory_order_acquire);
  while (v != nullptr && v->created_at > t) {
    EdgeVersion* prev = ref(v->prev).load(std::memory_order_seq_cst);
    if (prev == nullptr && ref(v->history_truncated).load(std::memory_order_seq_cst) != 0)
      raise(ErrorCode::snapshot_too_old, "edge history before timestamp " + std::to_string(v->created_at) + " was reclaimed");
    v = prev;
  }
  if (v == nullptr) return;

  thread_local std::vector<Entry> entries;
  gather(v, t, entries);
  SegmentedBitmap& checker = local_checker();
  checker.reserve_vertices(table_.logical_bound());
  for (std::size_t i = entries.size(); i-- > 0;) {
    const Entry& e = entries[i];
    if (checker.test_and_mark(e.dst)) continue;
    if (e.weight != kTombstone && keep_destination(e.dst, e.time, t)) out.push_back({e.dst, e.weight});
  }
  for (const Entry& e : entries) checker.clear(e.dst);
  if (options_.audit_checker && !checker.all_zero()) dirty_scans_.fetch_add(1, std::memory_order_relaxed);
}

std::size_t EdgeStore::gc_versions(Offset vertex, Timestamp horizon) {
  VertexBlock& block = table_.block(vertex);
  std::vector<EdgeVersion*> doomed;
  {
    std::lock_guard lock(stripe(vertex));
    EdgeVersion* keep = ref(block.edges).load(std::memory_order_acquire);
    while (keep != nullptr && keep->created_at > horizon) keep = ref(keep->prev).load(std::memory_order_acquire);
    if (keep == nullptr) return 0;
    EdgeVersion* old = ref(keep->prev).load(std::memory_order_acquire);
    if (old == nullptr) return 0;
    ref(keep->history_truncated).store(1, std::memory_order_seq_cst);
    ref(keep->prev).store(nullptr, std::memory_order_seq_cst);
    for (EdgeVersion* v = old; v != nullptr; v = ref(v->prev).load(std::memory_order_acquire)) doomed.push_back(v);
  }
  for (EdgeVersion* v : doomed) retire_version(v);
  reclaimed_.fetch_add(doomed.size(), std::memory_order_relaxed);
  return doomed.size();
}

std::size_t EdgeStore::version_count(Offset vertex) const {
  std::size_t n = 0;
  for (EdgeVersion* v = ref(table_.block(vertex).edges).load(std::memory_order_acquire); v != nullptr;
       v = ref(v->prev).load(std::memory_order_acquire))
    ++n;
  return n;
}

EdgeStoreStats EdgeStore::stats() const {
  EdgeStoreStats s;
  s.compactions = compactions_.load(std::memory_order_relaxed);
  s.blocks_visited = blocks_visited_.load(std::memory_order_relaxed);
  s.bootstraps = bootstraps_.load(std::memory_order_relaxed);
  s.reordered_logs = reordered_.load(std::memory_order_relaxed);
  s.versions_reclaimed = reclaimed_.load(std::memory_order_relaxed);
  s.dirty_checker_scans = dirty_scans_.load(std::memory_order_relaxed);
  s.versions = versions_.load(std::memory_order_relaxed);
  s.snapshot_blocks = snapshot_blocks_.load(std::memory_order_relaxed);
  s.log_slots = log_slots_.load(std::memory_order_relaxed);
  return s;
}

EdgeStoreStats EdgeStore::audit() const {
  EdgeStoreStats s = stats();
  s.versions = s.snapshot_blocks = s.log_slots = 0;
  const std::uint64_t bound = table_.logical_bound();
  for (std::uint64_t i = 0; i < bound; ++i) {
    VertexBlock* b = table_.try_block(offset_of(i));
    if (b == nullptr) continue;
    for (EdgeVersion* v = ref(b->edges).load(std::memory_order_acquire); v != nullptr;
         v = ref(v->prev).load(std::memory_order_acquire)) {
      ++s.versions;
      s.snapshot_blocks += v->deg;
      s.log_slots += v->log_capacity();
    }
  }
  return s;
}

}  // namespace sortgraph
