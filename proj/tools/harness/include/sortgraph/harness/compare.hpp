#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sortgraph/sort_optimizer.hpp"

namespace sortgraph::harness {

struct IndexRow {
  std::string name;  // uniform | veb | sort
  FanoutConfig config;
  std::uint64_t slots = 0;
  std::uint64_t bytes = 0;
  double insert_seconds = 0.0;
  double expected_slots = 0.0;
};

// Inserts the same n seeded random distinct ids into three trees.
std::vector<IndexRow> compare_index(unsigned bits, std::uint64_t n, std::uint64_t seed, unsigned layers);

}  // namespace sortgraph::harness
