#include "sortgraph/vertex_table.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>

#include "sortgraph/error.hpp"

namespace sortgraph {

namespace {

template <class T>
inline std::atomic_ref<T> ref(T& field) {
  return std::atomic_ref<T>(field);
}

}  // namespace

VertexTable::VertexTable(std::size_t initial_segment_blocks) : initial_(initial_segment_blocks) {
  if (initial_ == 0) raise(ErrorCode::invalid_argument, "initial segment must hold at least one block");
}

VertexTable::~VertexTable() {
  for (auto& slot : segments_) {
    Segment* seg = slot.load(std::memory_order_acquire);
    if (seg == nullptr) continue;
    std::free(seg->blocks);
    std::free(seg->meta);
    delete seg;
  }
}

std::size_t VertexTable::segment_size(std::size_t segment) const {
  return segment == 0 ? initial_ : initial_ << (segment - 1);
}

std::pair<std::size_t, std::size_t> VertexTable::locate(std::uint64_t logical) const {
  if (logical < initial_) return {0, static_cast<std::size_t>(logical)};
  const std::uint64_t q = logical / initial_;
  const std::size_t segment = static_cast<std::size_t>(std::bit_width(q));
  const std::uint64_t start = static_cast<std::uint64_t>(initial_) << (segment - 1);
  return {segment, static_cast<std::size_t>(logical - start)};
}

VertexTable::Segment* VertexTable::segment_at(std::size_t segment) const {
  if (segment >= kMaxSegments) return nullptr;
  return segments_[segment].load(std::memory_order_acquire);
}

VertexTable::Segment* VertexTable::ensure_segment(std::size_t segment) {
  if (segment >= kMaxSegments) raise(ErrorCode::capacity, "vertex table exhausted its segment directory");
  Segment* seg = segments_[segment].load(std::memory_order_acquire);
  if (seg != nullptr) return seg;
  std::lock_guard lock(grow_mutex_);
  seg = segments_[segment].load(std::memory_order_acquire);
  if (seg != nullptr) return seg;

  const std::size_t n = segment_size(segment);
  void* blocks = std::aligned_alloc(64, ((n * sizeof(VertexBlock) + 63) / 64) * 64);
  auto* meta = static_cast<VertexMeta*>(std::malloc(n * sizeof(VertexMeta)));
  if (blocks == nullptr || meta == nullptr) {
    std::free(blocks);
    std::free(meta);
    raise(ErrorCode::allocation_failure, "cannot allocate a vertex segment of " + std::to_string(n) + " blocks");
  }
  std::memset(blocks, 0, n * sizeof(VertexBlock));
  for (std::size_t i = 0; i < n; ++i) meta[i] = {kNeverCreated, 0};
  seg = new Segment{static_cast<VertexBlock*>(blocks), meta};
  segments_[segment].store(seg, std::memory_order_release);
  return seg;
}

VertexBlock* VertexTable::try_block(Offset offset) const {
  if (offset % kVertexBlockBytes != 0) return nullptr;
  const auto [segment, index] = locate(logical_id(offset));
  Segment* seg = segment_at(segment);
  return seg == nullptr ? nullptr : &seg->blocks[index];
}

VertexBlock& VertexTable::block(Offset offset) const {
  if (offset % kVertexBlockBytes != 0 || logical_id(offset) >= allocated_blocks())
    raise(ErrorCode::out_of_range, "offset " + std::to_string(offset) + " was never allocated");
  const auto [segment, index] = locate(logical_id(offset));
  Segment* seg = segment_at(segment);
  if (seg == nullptr) raise(ErrorCode::out_of_range, "offset " + std::to_string(offset) + " was never allocated");
  return seg->blocks[index];
}

VertexMeta& VertexTable::meta(Offset offset) const {
  block(offset);
  const auto [segment, index] = locate(logical_id(offset));
  return segment_at(segment)->meta[index];
}

VertexView VertexTable::read(Offset offset) const {
  VertexBlock& b = block(offset);
  VertexMeta& m = meta(offset);
  VertexView v;
  v.created_at = ref(m.created_at).load(std::memory_order_acquire);
  v.del_time = ref(b.del_time).load(std::memory_order_acquire);
  v.id = ref(b.id).load(std::memory_order_acquire);
  v.deg = ref(b.deg).load(std::memory_order_acquire);
  const std::uint64_t state = ref(b.state).load(std::memory_order_acquire);
  v.size = state_size(state);
  v.cap = state_cap(state);
  v.edges = ref(b.edges).load(std::memory_order_acquire);
  v.prev_incarnation = ref(m.prev_incarnation).load(std::memory_order_acquire);
  return v;
}

bool VertexTable::has_free_slots() const { return free_count_.load(std::memory_order_acquire) != 0; }

std::optional<Timestamp> VertexTable::oldest_free_deletion() const {
  std::lock_guard lock(free_mutex_);
  if (free_.empty()) return std::nullopt;
  return free_.front().del_time;
}

VertexTable::Allocation VertexTable::allocate(VertexId id, Timestamp created_at, const RecyclePolicy& policy,
                                              std::optional<Offset> prev_offset) {
  if (created_at >= kNeverCreated) raise(ErrorCode::capacity, "creation timestamp out of range");
  Allocation out;
  std::optional<FreeSlot> reuse;
  if (has_free_slots()) {
    std::lock_guard lock(free_mutex_);
    if (!free_.empty()) {
      const FreeSlot& front = free_.front();
      if (front.del_time < policy.horizon && front.stamp < policy.min_active_epoch) {
        reuse = front;
        free_.pop_front();
        free_count_.fetch_sub(1, std::memory_order_release);
      }
    }
  }

  auto prev_link = [&](Offset offset) -> std::uint32_t {
    if (!prev_offset || *prev_offset == offset) return 0;
    return static_cast<std::uint32_t>(logical_id(*prev_offset) + 1);
  };

  if (reuse) {
    const Offset offset = reuse->offset;
    VertexBlock& b = block(offset);
    VertexMeta& m = meta(offset);
    out.offset = offset;
    out.recycled = true;
    out.previous_id = ref(b.id).load(std::memory_order_relaxed);
    out.previous_edges = ref(b.edges).load(std::memory_order_relaxed);
    // The new creation time goes first so the slot reads as "not yet
    // created" to every reader until the fields below are consistent.
    ref(m.created_at).store(static_cast<std::uint32_t>(created_at), std::memory_order_seq_cst);
    ref(m.prev_incarnation).store(prev_link(offset), std::memory_order_release);
    ref(b.id).store(id, std::memory_order_release);
    ref(b.deg).store(0, std::memory_order_release);
    ref(b.state).store(0, std::memory_order_release);
    ref(b.edges).store(nullptr, std::memory_order_release);
    ref(b.del_time).store(0, std::memory_order_release);
    return out;
  }

  const std::uint64_t logical = next_logical_.fetch_add(1, std::memory_order_acq_rel);
  if (offset_of(logical) > kMaxOffset) {
    next_logical_.fetch_sub(1, std::memory_order_acq_rel);
    raise(ErrorCode::capacity, "vertex table offsets exceed 32 bits");
  }
  const auto [segment, index] = locate(logical);
  Segment* seg = ensure_segment(segment);
  VertexBlock& b = seg->blocks[index];
  VertexMeta& m = seg->meta[index];
  out.offset = offset_of(logical);
  ref(m.prev_incarnation).store(prev_link(out.offset), std::memory_order_release);
  ref(b.id).store(id, std::memory_order_release);
  ref(m.created_at).store(static_cast<std::uint32_t>(created_at), std::memory_order_release);
  return out;
}

void VertexTable::begin_tombstone(Offset offset) {
  std::uint32_t expected = 0;
  if (!ref(block(offset).del_time).compare_exchange_strong(expected, kDeleting, std::memory_order_acq_rel))
    raise(ErrorCode::already_deleted, "vertex at offset " + std::to_string(offset) + " is already deleted");
}

void VertexTable::finish_tombstone(Offset offset, Timestamp t, std::uint64_t stamp) {
  if (t == 0 || t >= kDeleting) raise(ErrorCode::invalid_argument, "deletion timestamp out of range");
  ref(block(offset).del_time).store(static_cast<std::uint32_t>(t), std::memory_order_seq_cst);
  std::lock_guard lock(free_mutex_);
  free_.push_back({offset, t, stamp});
  free_count_.fetch_add(1, std::memory_order_release);
}

void VertexTable::tombstone(Offset offset, Timestamp t, std::uint64_t stamp) {
  begin_tombstone(offset);
  finish_tombstone(offset, t, stamp);
}

void VertexTable::abandon(Offset offset, std::uint64_t stamp) {
  ref(meta(offset).created_at).store(kNeverCreated, std::memory_order_seq_cst);
  std::lock_guard lock(free_mutex_);
  free_.push_back({offset, 0, stamp});
  free_count_.fetch_add(1, std::memory_order_release);
}

std::uint64_t VertexTable::allocated_blocks() const noexcept {
  return next_logical_.load(std::memory_order_acquire);
}

std::uint64_t VertexTable::capacity_blocks() const noexcept {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < kMaxSegments; ++s)
    if (segments_[s].load(std::memory_order_acquire) != nullptr) total += segment_size(s);
  return total;
}

std::uint64_t VertexTable::free_slots() const { return free_count_.load(std::memory_order_acquire); }

}  // namespace sortgraph
