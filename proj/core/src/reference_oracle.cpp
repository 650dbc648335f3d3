#include "sortgraph/reference_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include "sortgraph/error.hpp"

namespace sortgraph {

std::string_view to_string(MutationKind kind) noexcept {
  switch (kind) {
    case MutationKind::insert_vertex: return "insert_vertex";
    case MutationKind::delete_vertex: return "delete_vertex";
    case MutationKind::insert_edge: return "insert_edge";
    case MutationKind::update_edge: return "update_edge";
    case MutationKind::delete_edge: return "delete_edge";
  }
  return "unknown";
}

const OracleGraph::Incarnation* OracleGraph::incarnation_at(VertexId id, Timestamp t) const {
  auto it = vertices_.find(id);
  if (it == vertices_.end()) return nullptr;
  const Incarnation* found = nullptr;
  for (const Incarnation& inc : it->second)
    if (inc.created <= t) found = &inc;
  return found;
}

bool OracleGraph::live_now(VertexId id) const {
  auto it = vertices_.find(id);
  return it != vertices_.end() && !it->second.empty() && it->second.back().deleted == 0;
}

void OracleGraph::create(VertexId id, Timestamp t) { vertices_[id].push_back({t, 0}); }

void OracleGraph::apply(const Mutation& m) {
  if (m.time <= last_time_)
    raise(ErrorCode::invalid_argument, "mutation at " + std::to_string(m.time) + " does not follow " + std::to_string(last_time_));
  switch (m.kind) {
    case MutationKind::insert_vertex:
      if (!live_now(m.src)) create(m.src, m.time);
      break;
    case MutationKind::delete_vertex: {
      auto it = vertices_.find(m.src);
      if (it == vertices_.end()) raise(ErrorCode::not_found, "vertex " + std::to_string(m.src) + " does not exist");
      if (it->second.back().deleted != 0) raise(ErrorCode::already_deleted, "vertex " + std::to_string(m.src) + " is already deleted");
      it->second.back().deleted = m.time;
      break;
    }
    case MutationKind::insert_edge:
    case MutationKind::update_edge:
    case MutationKind::delete_edge: {
      const bool removal = m.kind == MutationKind::delete_edge;
      if (!removal) {
        if (std::isnan(m.weight)) raise(ErrorCode::invalid_argument, "edge weight is NaN");
        if (m.weight == kTombstone) raise(ErrorCode::zero_weight, "edge weight must be nonzero");
      }
      if (m.kind == MutationKind::insert_edge) {
        if (!live_now(m.src)) create(m.src, m.time);
        if (!live_now(m.dst)) create(m.dst, m.time);
      } else if (!live_now(m.src) || !live_now(m.dst)) {
        raise(ErrorCode::not_found, "edge endpoint does not exist");
      }
      edges_[m.src][m.dst].push_back({m.time, removal ? kTombstone : m.weight});
      break;
    }
  }
  last_time_ = m.time;
  ++applied_;
}

bool OracleGraph::vertex_visible(VertexId id, Timestamp t) const {
  const Incarnation* inc = incarnation_at(id, t);
  return inc != nullptr && (inc->deleted == 0 || t <= inc->deleted);
}

std::vector<Neighbor> OracleGraph::neighbors(VertexId id, Timestamp t) const {
  const Incarnation* src = incarnation_at(id, t);
  if (src == nullptr || (src->deleted != 0 && t > src->deleted))
    raise(ErrorCode::not_visible, "vertex " + std::to_string(id) + " is not visible at " + std::to_string(t));
  std::vector<Neighbor> out;
  auto it = edges_.find(id);
  if (it == edges_.end()) return out;
  for (const auto& [dst, writes] : it->second) {
    const Write* latest = nullptr;
    for (const Write& w : writes)
      if (w.time <= t) latest = &w;
    if (latest == nullptr || latest->weight == kTombstone || latest->time < src->created) continue;
    const Incarnation* target = incarnation_at(dst, t);
    if (target == nullptr || latest->time < target->created) continue;
    if (target->deleted != 0 && t > target->deleted) continue;
    out.push_back({dst, latest->weight});
  }
  return out;
}

std::vector<VertexId> OracleGraph::vertices(Timestamp t) const {
  std::vector<VertexId> out;
  for (const auto& [id, incs] : vertices_)
    if (vertex_visible(id, t)) out.push_back(id);
  return out;
}

AdjacencyView OracleGraph::view(Timestamp t) const {
  AdjacencyView g;
  for (VertexId id : vertices(t)) g.emplace(id, neighbors(id, t));
  return g;
}

namespace oracle {

namespace {

void require_source(const AdjacencyView& g, VertexId source) {
  if (!g.contains(source)) raise(ErrorCode::not_visible, "source " + std::to_string(source) + " is not visible");
}

}  // namespace

std::set<VertexId> khop(const AdjacencyView& g, VertexId source, unsigned k) {
  require_source(g, source);
  const auto dist = bfs(g, source);
  std::set<VertexId> out;
  for (const auto& [id, d] : dist)
    if (d != kUnreachableHops && d >= 1 && d <= k) out.insert(id);
  return out;
}

std::map<VertexId, std::uint64_t> bfs(const AdjacencyView& g, VertexId source) {
  require_source(g, source);
  std::map<VertexId, std::uint64_t> dist;
  for (const auto& [id, _] : g) dist[id] = kUnreachableHops;
  std::deque<VertexId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const VertexId u = queue.front();
    queue.pop_front();
    for (const Neighbor& n : g.at(u)) {
      if (dist[n.id] != kUnreachableHops) continue;
      dist[n.id] = dist[u] + 1;
      queue.push_back(n.id);
    }
  }
  return dist;
}

std::map<VertexId, double> sssp(const AdjacencyView& g, VertexId source) {
  require_source(g, source);
  constexpr double kInf = std::numeric_limits<double>::max();
  std::map<VertexId, double> dist;
  for (const auto& [id, _] : g) dist[id] = kInf;
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const Neighbor& n : g.at(u)) {
      const double candidate = d + static_cast<double>(n.weight);
      if (candidate < dist[n.id]) {
        dist[n.id] = candidate;
        heap.push({candidate, n.id});
      }
    }
  }
  return dist;
}

std::map<VertexId, double> pagerank(const AdjacencyView& g, unsigned iterations, double damping) {
  std::map<VertexId, double> score;
  if (g.empty()) return score;
  const double n = static_cast<double>(g.size());
  for (const auto& [id, _] : g) score[id] = 1.0 / n;
  for (unsigned it = 0; it < iterations; ++it) {
    std::map<VertexId, double> incoming;
    for (const auto& [id, _] : g) incoming[id] = 0.0;
    for (const auto& [u, out] : g) {
      if (out.empty()) continue;
      const double share = score[u] / static_cast<double>(out.size());
      for (const Neighbor& nb : out) incoming[nb.id] += share;
    }
    for (auto& [id, s] : score) s = (1.0 - damping) / n + damping * incoming[id];
  }
  return score;
}

std::map<VertexId, VertexId> wcc(const AdjacencyView& g) {
  std::map<VertexId, VertexId> parent;
  for (const auto& [id, _] : g) parent[id] = id;
  auto find = [&](VertexId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [u, out] : g)
    for (const Neighbor& n : out) {
      const VertexId a = find(u), b = find(n.id);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  std::map<VertexId, VertexId> label;
  for (const auto& [id, _] : g) label[id] = find(id);
  return label;
}

std::uint64_t triangle_count(const AdjacencyView& g) {
  std::map<VertexId, std::set<VertexId>> und;
  for (const auto& [u, out] : g) {
    und[u];
    for (const Neighbor& n : out) {
      if (n.id == u) continue;
      und[u].insert(n.id);
      und[n.id].insert(u);
    }
  }
  std::uint64_t count = 0;
  for (const auto& [u, nu] : und)
    for (VertexId v : nu) {
      if (v <= u) continue;
      for (VertexId w : und[v])
        if (w > v && nu.contains(w)) ++count;
    }
  return count;
}

std::map<VertexId, double> betweenness(const AdjacencyView& g, const std::vector<VertexId>& sources) {
  std::map<VertexId, double> bc;
  for (const auto& [id, _] : g) bc[id] = 0.0;
  for (VertexId s : sources) {
    require_source(g, s);
    std::map<VertexId, std::vector<VertexId>> preds;
    std::map<VertexId, double> sigma;
    std::map<VertexId, std::int64_t> dist;
    std::vector<VertexId> order;
    for (const auto& [id, _] : g) {
      sigma[id] = 0.0;
      dist[id] = -1;
    }
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<VertexId> queue{s};
    while (!queue.empty()) {
      const VertexId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (const Neighbor& n : g.at(v)) {
        if (dist[n.id] < 0) {
          dist[n.id] = dist[v] + 1;
          queue.push_back(n.id);
        }
        if (dist[n.id] == dist[v] + 1) {
          sigma[n.id] += sigma[v];
          preds[n.id].push_back(v);
        }
      }
    }
    std::map<VertexId, double> delta;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const VertexId w = *it;
      for (VertexId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) bc[w] += delta[w];
    }
  }
  return bc;
}

}  // namespace oracle

}  // namespace sortgraph
