#include "sortgraph/harness/memory.hpp"

namespace sortgraph::harness {

MemoryReport memory_report(const StorageStats& s, std::uint64_t threads, std::uint64_t segment_bits) {
  MemoryReport m;
  m.sort_bytes = s.index_slots * kSlotBytes;
  m.vertex_table_bytes = s.vertex_blocks * kVertexBlockBytes;
  m.snapshot_bytes = s.snapshot_blocks * kEdgeBlockBytes;
  m.log_bytes = s.log_slots * kLogBlockBytes;
  const std::uint64_t segments = (s.vertex_blocks + segment_bits - 1) / segment_bits;
  m.bitmap_bytes = threads * segment_bits * segments / 8;
  return m;
}

MemoryReport memory_report(const GraphStore& g, std::uint64_t threads) {
  return memory_report(g.storage_stats(), threads, g.edges().bitmap_segment_bits());
}

MemoryReport audited_memory_report(const GraphStore& g, std::uint64_t threads) {
  return memory_report(g.audit_storage(), threads, g.edges().bitmap_segment_bits());
}

}  // namespace sortgraph::harness
