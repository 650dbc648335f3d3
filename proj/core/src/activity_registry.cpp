#include "sortgraph/activity_registry.hpp"

#include <algorithm>
#include <limits>
#include <thread>

#include "sortgraph/error.hpp"

namespace sortgraph {

namespace {

thread_local std::size_t claim_hint = 0;

inline void cpu_relax() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#endif
}

template <class Load>
std::uint64_t wait_resolved(Load&& load, std::uint64_t pending) {
  std::uint64_t v = load();
  for (unsigned spins = 0; v == pending; ++spins) {
    if (spins < 64)
      cpu_relax();
    else
      std::this_thread::yield();
    v = load();
  }
  return v;
}

}  // namespace

ActivityRegistry::ActivityRegistry(std::size_t entries)
    : entries_(std::make_unique<Entry[]>(std::max<std::size_t>(entries, 1))),
      entry_count_(std::max<std::size_t>(entries, 1)) {}

ActivityRegistry::~ActivityRegistry() {
  for (const Retired& r : retired_) r.deleter(r.object);
}

ActivityRegistry::Entry& ActivityRegistry::claim() {
  std::size_t start = claim_hint % entry_count_;
  for (unsigned round = 0;; ++round) {
    for (std::size_t k = 0; k < entry_count_; ++k) {
      const std::size_t i = (start + k) % entry_count_;
      Entry& e = entries_[i];
      std::uint32_t expected = 0;
      if (e.owned.load(std::memory_order_relaxed) == 0 &&
          e.owned.compare_exchange_strong(expected, 1, std::memory_order_acquire)) {
        claim_hint = i;
        return e;
      }
    }
    std::this_thread::yield();
  }
}

void ActivityRegistry::release(Entry& entry) {
  entry.write_ts.store(0, std::memory_order_seq_cst);
  entry.read_ts.store(0, std::memory_order_seq_cst);
  entry.epoch.store(0, std::memory_order_seq_cst);
  entry.owned.store(0, std::memory_order_release);
}

Timestamp ActivityRegistry::stable_now() const {
  const Timestamp issued = clock_.load(std::memory_order_seq_cst);
  Timestamp stable = issued;
  for (std::size_t i = 0; i < entry_count_; ++i) {
    const Entry& e = entries_[i];
    const std::uint64_t ts = wait_resolved([&] { return e.write_ts.load(std::memory_order_seq_cst); }, kPending);
    if (ts != 0 && ts <= issued) stable = std::min(stable, ts - 1);
  }
  return stable;
}

void ActivityRegistry::wait_stable(Timestamp t) const {
  for (unsigned spins = 0; stable_now() < t; ++spins) {
    if (spins < 16)
      cpu_relax();
    else
      std::this_thread::yield();
  }
}

Timestamp ActivityRegistry::reader_horizon() const {
  Timestamp horizon = stable_now();
  for (std::size_t i = 0; i < entry_count_; ++i) {
    const Entry& e = entries_[i];
    const std::uint64_t ts = wait_resolved([&] { return e.read_ts.load(std::memory_order_seq_cst); }, kPending);
    if (ts != 0) horizon = std::min(horizon, ts);
  }
  return horizon;
}

std::uint64_t ActivityRegistry::min_active_epoch() const {
  std::atomic_thread_fence(std::memory_order_seq_cst);
  std::uint64_t lowest = std::numeric_limits<std::uint64_t>::max();
  for (std::size_t i = 0; i < entry_count_; ++i) {
    const std::uint64_t e = entries_[i].epoch.load(std::memory_order_seq_cst);
    if (e != 0) lowest = std::min(lowest, e);
  }
  return lowest;
}

void ActivityRegistry::retire(void* object, Deleter deleter) {
  const std::uint64_t stamp = retire_stamp();
  std::size_t pending;
  {
    std::lock_guard lock(retired_mutex_);
    retired_.push_back({object, deleter, stamp});
    pending = retired_.size();
  }
  if (pending >= 256) reclaim();
}

std::size_t ActivityRegistry::reclaim() {
  const std::uint64_t lowest = min_active_epoch();
  std::vector<Retired> ready;
  {
    std::lock_guard lock(retired_mutex_);
    auto keep = std::partition(retired_.begin(), retired_.end(), [&](const Retired& r) { return r.stamp >= lowest; });
    ready.assign(keep, retired_.end());
    retired_.erase(keep, retired_.end());
  }
  for (const Retired& r : ready) r.deleter(r.object);
  return ready.size();
}

std::size_t ActivityRegistry::pending_retired() const {
  std::lock_guard lock(retired_mutex_);
  return retired_.size();
}

ActivityRegistry::Scope::Scope(ActivityRegistry& registry) : registry_(registry), entry_(registry.claim()) {
  entry_.epoch.store(registry_.epoch_.load(std::memory_order_seq_cst), std::memory_order_seq_cst);
  std::atomic_thread_fence(std::memory_order_seq_cst);
}

ActivityRegistry::Scope::Scope(ActivityRegistry& registry, ReadNow) : Scope(registry) {
  entry_.read_ts.store(kPending, std::memory_order_seq_cst);
  read_ts_ = registry_.clock();
  entry_.read_ts.store(std::max<Timestamp>(read_ts_, 1), std::memory_order_seq_cst);
  registry_.wait_stable(read_ts_);
}

ActivityRegistry::Scope::Scope(ActivityRegistry& registry, Timestamp read_at) : Scope(registry) {
  read_ts_ = read_at;
  // A zero timestamp would read as "unregistered"; readers at 0 see nothing
  // that needs protecting anyway.
  entry_.read_ts.store(std::max<Timestamp>(read_at, 1), std::memory_order_seq_cst);
}

ActivityRegistry::Scope::~Scope() {
  if (writing_) end_write();
  registry_.release(entry_);
}

Timestamp ActivityRegistry::Scope::begin_write() {
  if (writing_) end_write();
  entry_.write_ts.store(kPending, std::memory_order_seq_cst);
  const Timestamp ts = registry_.clock_.fetch_add(1, std::memory_order_seq_cst) + 1;
  if (ts > kMaxTimestamp) {
    entry_.write_ts.store(0, std::memory_order_seq_cst);
    raise(ErrorCode::capacity, "logical clock exhausted");
  }
  entry_.write_ts.store(ts, std::memory_order_seq_cst);
  writing_ = true;
  return ts;
}

void ActivityRegistry::Scope::end_write() {
  entry_.write_ts.store(0, std::memory_order_seq_cst);
  writing_ = false;
}

ActivityRegistry::ReaderPin::ReaderPin(ActivityRegistry& registry) : registry_(registry), entry_(registry.claim()) {
  entry_.read_ts.store(kPending, std::memory_order_seq_cst);
  ts_ = registry_.clock();
  entry_.read_ts.store(std::max<Timestamp>(ts_, 1), std::memory_order_seq_cst);
  registry_.wait_stable(ts_);
}

ActivityRegistry::ReaderPin::ReaderPin(ActivityRegistry& registry, Timestamp read_at)
    : registry_(registry), entry_(registry.claim()), ts_(read_at) {
  entry_.read_ts.store(std::max<Timestamp>(read_at, 1), std::memory_order_seq_cst);
}

ActivityRegistry::ReaderPin::~ReaderPin() { registry_.release(entry_); }

}  // namespace sortgraph
