#include "sortgraph/harness/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>

#include "sortgraph/harness/ids.hpp"

namespace sortgraph::harness {

namespace {

std::vector<EdgeRecord> chung_lu(const std::vector<VertexId>& ids, std::uint64_t edges, double exponent,
                                 std::mt19937_64& rng) {
  std::vector<double> weight(ids.size());
  const double alpha = 1.0 / (exponent - 1.0);
  for (std::size_t i = 0; i < ids.size(); ++i) weight[i] = std::pow(static_cast<double>(i + 1), -alpha);
  std::discrete_distribution<std::size_t> pick(weight.begin(), weight.end());
  std::uniform_real_distribution<float> w(1.0f, 10.0f);
  std::vector<EdgeRecord> out;
  out.reserve(edges);
  for (std::uint64_t e = 0; e < edges; ++e) out.push_back({ids[pick(rng)], ids[pick(rng)], w(rng)});
  return out;
}

}  // namespace

std::vector<EdgeRecord> power_law_edges(std::uint64_t vertices, std::uint64_t edges, double exponent,
                                        std::uint64_t seed) {
  const std::vector<VertexId> ids = gen_ids(Distribution::uniform, std::max<std::uint64_t>(vertices, 1), 32, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  return chung_lu(ids, edges, exponent, rng);
}

std::vector<EdgeRecord> power_law_edges(const std::vector<VertexId>& ids, std::uint64_t edges, double exponent,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  return chung_lu(ids, edges, exponent, rng);
}

std::vector<EdgeRecord> random_edges(std::uint64_t vertices, std::uint64_t edges, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<VertexId> v(0, vertices - 1);
  std::uniform_real_distribution<float> w(1.0f, 10.0f);
  std::set<std::pair<VertexId, VertexId>> seen;
  std::vector<EdgeRecord> out;
  const std::uint64_t limit = vertices < 2 ? 0 : vertices * (vertices - 1);
  while (out.size() < std::min(edges, limit)) {
    const VertexId a = v(rng), b = v(rng);
    if (a == b || !seen.insert({a, b}).second) continue;
    out.push_back({a, b, w(rng)});
  }
  return out;
}

DenseGraph dota_like(std::uint64_t vertices, std::uint64_t avg_degree, std::uint64_t seed) {
  DenseGraph g;
  g.vertices = gen_ids(Distribution::uniform, vertices, 32, seed);
  std::mt19937_64 rng(seed + 1);
  std::vector<EdgeRecord> raw = chung_lu(g.vertices, vertices * avg_degree, 2.5, rng);
  std::set<std::pair<VertexId, VertexId>> seen;
  for (const EdgeRecord& e : raw)
    if (e.src != e.dst && seen.insert({e.src, e.dst}).second) g.edges.push_back(e);
  return g;
}

}  // namespace sortgraph::harness
