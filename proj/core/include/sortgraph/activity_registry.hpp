#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "sortgraph/types.hpp"

namespace sortgraph {

// Shared coordination state for one graph instance:
//  * the global logical clock that stamps every write,
//  * the set of in-flight writes, so readers can pick a timestamp at which
//    every earlier write is fully published (the stable watermark),
//  * the timestamps of registered readers, which bound MVCC garbage
//    collection and vertex-slot recycling,
//  * epoch-based reclamation for memory that lock-free readers may still
//    be traversing.
//
// Each operation claims one entry for its duration. Entries live in a fixed
// array; claiming spins when every entry is in use.
class ActivityRegistry {
 public:
  static constexpr std::size_t kDefaultEntries = 256;

  explicit ActivityRegistry(std::size_t entries = kDefaultEntries);
  ~ActivityRegistry();

  ActivityRegistry(const ActivityRegistry&) = delete;
  ActivityRegistry& operator=(const ActivityRegistry&) = delete;

  class Scope;
  class ReaderPin;

  // Largest timestamp t such that every write stamped <= t has completed.
  Timestamp stable_now() const;
  // Last timestamp handed out, published or not.
  Timestamp clock() const noexcept { return clock_.load(std::memory_order_acquire); }
  // Waits until every write stamped <= t is published.
  void wait_stable(Timestamp t) const;

  // Smallest timestamp any registered or future reader may observe.
  Timestamp reader_horizon() const;
  // Smallest epoch held by an active scope; max() when none is active.
  std::uint64_t min_active_epoch() const;
  // Advances the epoch and returns the value that retired objects must be
  // strictly older than the minimum active epoch to be freed.
  std::uint64_t retire_stamp() noexcept { return epoch_.fetch_add(1, std::memory_order_seq_cst); }

  using Deleter = void (*)(void*);
  void retire(void* object, Deleter deleter);
  template <class T>
  void retire(T* object) {
    retire(static_cast<void*>(object), [](void* p) { delete static_cast<T*>(p); });
  }
  // Frees every retired object no active scope can still reference.
  std::size_t reclaim();
  std::size_t pending_retired() const;

 private:
  friend class Scope;
  friend class ReaderPin;

  struct alignas(64) Entry {
    std::atomic<std::uint32_t> owned{0};
    std::atomic<std::uint64_t> epoch{0};       // 0 = not in a critical section
    std::atomic<std::uint64_t> write_ts{0};    // in-flight write timestamp
    std::atomic<std::uint64_t> read_ts{0};     // registered read timestamp
  };

  static constexpr std::uint64_t kPending = ~std::uint64_t{0};

  Entry& claim();
  void release(Entry& entry);

  struct Retired {
    void* object;
    Deleter deleter;
    std::uint64_t stamp;
  };

  std::unique_ptr<Entry[]> entries_;
  std::size_t entry_count_;
  alignas(64) std::atomic<Timestamp> clock_{0};
  alignas(64) std::atomic<std::uint64_t> epoch_{1};
  mutable std::mutex retired_mutex_;
  std::vector<Retired> retired_;
};

// RAII claim of a registry entry for one operation. Every scope is a
// critical section (pointers loaded inside stay valid until it ends). A
// reader scope additionally registers its read timestamp; a writer stamps
// mutations with begin_write()/end_write().
class ActivityRegistry::Scope {
 public:
  struct ReadNow {};
  static constexpr ReadNow read_now{};

  explicit Scope(ActivityRegistry& registry);
  // Reader at the latest issued timestamp, once it is stable.
  Scope(ActivityRegistry& registry, ReadNow);
  // Reader at an explicit, possibly historical, timestamp.
  Scope(ActivityRegistry& registry, Timestamp read_at);
  ~Scope();

  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

  Timestamp read_timestamp() const noexcept { return read_ts_; }

  // Draws the next clock value and marks it in flight until end_write().
  Timestamp begin_write();
  void end_write();

 private:
  ActivityRegistry& registry_;
  Entry& entry_;
  Timestamp read_ts_ = 0;
  bool writing_ = false;
};

// Registers a read timestamp without entering a critical section, for
// snapshot handles that outlive individual operations.
class ActivityRegistry::ReaderPin {
 public:
  explicit ReaderPin(ActivityRegistry& registry);
  ReaderPin(ActivityRegistry& registry, Timestamp read_at);
  ~ReaderPin();

  ReaderPin(const ReaderPin&) = delete;
  ReaderPin& operator=(const ReaderPin&) = delete;

  Timestamp timestamp() const noexcept { return ts_; }

 private:
  ActivityRegistry& registry_;
  Entry& entry_;
  Timestamp ts_ = 0;
};

}  // namespace sortgraph
