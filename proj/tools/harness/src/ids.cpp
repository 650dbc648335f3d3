#include "sortgraph/harness/ids.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "sortgraph/error.hpp"

namespace sortgraph::harness {

Distribution parse_distribution(std::string_view name) {
  if (name == "uniform") return Distribution::uniform;
  if (name == "skewed") return Distribution::skewed;
  if (name == "heavy-tailed" || name == "heavy_tailed") return Distribution::heavy_tailed;
  raise(ErrorCode::invalid_argument, "unknown distribution '" + std::string(name) + "'");
}

std::string_view to_string(Distribution d) noexcept {
  switch (d) {
    case Distribution::uniform: return "uniform";
    case Distribution::skewed: return "skewed";
    case Distribution::heavy_tailed: return "heavy-tailed";
  }
  return "?";
}

namespace {

std::uint64_t domain_max(unsigned bits) {
  if (bits == 0 || bits > 64) raise(ErrorCode::invalid_argument, "id width must be in [1, 64]");
  return bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

}  // namespace

std::uint64_t skewed_max(unsigned bits) {
  return static_cast<std::uint64_t>(static_cast<long double>(domain_max(bits)) / 1.5L);
}

std::uint64_t support_size(Distribution d, unsigned bits) {
  const std::uint64_t top = domain_max(bits);
  switch (d) {
    case Distribution::uniform: return top == ~std::uint64_t{0} ? top : top + 1;
    case Distribution::skewed: return skewed_max(bits) + 1;
    case Distribution::heavy_tailed: return top;  // 1 .. 2^bits - 1
  }
  return 0;
}

std::vector<VertexId> gen_ids(Distribution d, std::uint64_t n, unsigned bits, std::uint64_t seed) {
  const std::uint64_t support = support_size(d, bits);
  if (n > support)
    raise(ErrorCode::infeasible, "cannot draw " + std::to_string(n) + " distinct ids from a support of " +
                                     std::to_string(support));
  std::mt19937_64 rng(seed);
  std::vector<VertexId> out;
  out.reserve(n);

  if (d != Distribution::heavy_tailed && support <= (std::uint64_t{1} << 26) && n * 4 > support) {
    // Dense request: partial Fisher-Yates over the whole support.
    std::vector<VertexId> all(support);
    std::iota(all.begin(), all.end(), VertexId{0});
    for (std::uint64_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::uint64_t> pick(i, support - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    all.resize(n);
    return all;
  }

  std::unordered_set<VertexId> seen;
  seen.reserve(n * 2);
  std::uniform_int_distribution<std::uint64_t> uniform(0, support - 1);
  std::uniform_real_distribution<long double> unit(0.0L, 1.0L);
  const long double log_top = std::log(static_cast<long double>(domain_max(bits)) + 1.0L);
  while (out.size() < n) {
    VertexId id;
    if (d == Distribution::heavy_tailed) {
      // Inverse CDF of the continuous 1/x law on [1, 2^bits).
      const long double x = std::exp(unit(rng) * log_top);
      id = static_cast<VertexId>(x);
      if (id < 1) id = 1;
      if (id > support) id = support;
    } else {
      id = uniform(rng);
    }
    if (seen.insert(id).second) out.push_back(id);
  }
  return out;
}

}  // namespace sortgraph::harness
