#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "sortgraph/types.hpp"

namespace sortgraph::harness {

enum class Distribution { uniform, skewed, heavy_tailed };

Distribution parse_distribution(std::string_view name);
std::string_view to_string(Distribution d) noexcept;

// Number of distinct ids the distribution can produce for `bits`-bit ids.
std::uint64_t support_size(Distribution d, unsigned bits);
// Largest id the skewed distribution produces: floor((2^bits - 1) / 1.5).
std::uint64_t skewed_max(unsigned bits);

// n distinct ids, in draw order.
//  uniform:      [0, 2^bits)
//  skewed:       [0, skewed_max(bits)]
//  heavy_tailed: p(i) ~ 1/i over [1, 2^bits), repeats redrawn
// Raises infeasible when n exceeds the support.
std::vector<VertexId> gen_ids(Distribution d, std::uint64_t n, unsigned bits, std::uint64_t seed);

}  // namespace sortgraph::harness
