#include "sortgraph/harness/compare.hpp"

#include <chrono>

#include "sortgraph/harness/ids.hpp"
#include "sortgraph/sort_index.hpp"

namespace sortgraph::harness {

std::vector<IndexRow> compare_index(unsigned bits, std::uint64_t n, std::uint64_t seed, unsigned layers) {
  const UniverseSpec spec{bits, n, layers};
  spec.validate();
  const unsigned l = spec.effective_layers();
  const std::vector<VertexId> ids = gen_ids(Distribution::uniform, n, bits, seed);

  std::vector<IndexRow> rows;
  rows.push_back({"uniform", baseline_config(BaselineKind::uniform, bits, l)});
  rows.push_back({"veb", baseline_config(BaselineKind::veb, bits, l)});
  rows.push_back({"sort", optimize(spec)});
  for (IndexRow& row : rows) {
    const auto start = std::chrono::steady_clock::now();
    SortIndex index(row.config);
    for (std::size_t i = 0; i < ids.size(); ++i) index.insert(ids[i], offset_of(i));
    row.insert_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    row.slots = index.slot_count();
    row.bytes = index.bytes();
    row.expected_slots = expected_space(row.config, spec);
  }
  return rows;
}

}  // namespace sortgraph::harness
