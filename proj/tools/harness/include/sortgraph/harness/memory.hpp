#pragma once

#include <cstdint>

#include "sortgraph/graph_store.hpp"

namespace sortgraph::harness {

// Accounting model, not process RSS.
struct MemoryReport {
  std::uint64_t sort_bytes = 0;          // index slots * 8
  std::uint64_t vertex_table_bytes = 0;  // allocated blocks * 32
  std::uint64_t snapshot_bytes = 0;      // snapshot blocks * 8
  std::uint64_t log_bytes = 0;           // log slots * 12
  std::uint64_t bitmap_bytes = 0;        // threads * L * ceil(n / L) / 8

  std::uint64_t total() const {
    return sort_bytes + vertex_table_bytes + snapshot_bytes + log_bytes + bitmap_bytes;
  }

  friend bool operator==(const MemoryReport&, const MemoryReport&) = default;
};

MemoryReport memory_report(const StorageStats& stats, std::uint64_t threads, std::uint64_t segment_bits);
// From the incrementally maintained counters.
MemoryReport memory_report(const GraphStore& g, std::uint64_t threads);
// Recomputed by walking the index, table and edge chains.
MemoryReport audited_memory_report(const GraphStore& g, std::uint64_t threads);

}  // namespace sortgraph::harness
