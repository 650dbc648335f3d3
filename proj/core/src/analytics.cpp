#include "sortgraph/analytics.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <functional>
#include <numeric>
#include <ostream>
#include <queue>
#include <thread>

#include "sortgraph/error.hpp"

namespace sortgraph::analytics {

namespace {

Offset require_source(const Snapshot& snapshot, VertexId source) {
  const auto offset = snapshot.resolve(source);
  if (!offset) raise(ErrorCode::not_visible, "source vertex " + std::to_string(source) + " is not visible");
  return *offset;
}

// Runs body(lo, hi) over [0, n) split into contiguous chunks.
void parallel_for(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t, std::uint64_t)>& body) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2 * threads) {
    body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (n + threads - 1) / threads;
  for (unsigned k = 0; k < threads; ++k) {
    const std::uint64_t lo = std::min<std::uint64_t>(n, k * chunk), hi = std::min<std::uint64_t>(n, lo + chunk);
    if (lo < hi) pool.emplace_back(body, lo, hi);
  }
  for (std::thread& t : pool) t.join();
}

template <class T>
AlgoResult<T> empty_result(const Snapshot& snapshot, T fill) {
  AlgoResult<T> r;
  const std::uint64_t bound = snapshot.logical_bound();
  r.values.assign(bound, fill);
  r.present.assign(bound, 0);
  r.ids.assign(bound, 0);
  for (Offset v : snapshot.vertices()) {
    r.present[logical_id(v)] = 1;
    r.ids[logical_id(v)] = snapshot.id_of(v);
  }
  return r;
}

template <class T>
AlgoResult<T> result_from(const Csr& g, T fill) {
  AlgoResult<T> r;
  r.values.assign(g.bound(), fill);
  r.present = g.present;
  r.ids = g.ids;
  return r;
}

}  // namespace

template <class T>
void write_csv(std::ostream& out, const AlgoResult<T>& result) {
  out << "vertex_id,value\n";
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < result.values.size(); ++i)
    if (result.present[i]) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return result.ids[a] < result.ids[b]; });
  const auto precision = out.precision(17);
  for (std::size_t i : order) out << result.ids[i] << ',' << result.values[i] << '\n';
  out.precision(precision);
}

template void write_csv(std::ostream&, const AlgoResult<std::uint64_t>&);
template void write_csv(std::ostream&, const AlgoResult<double>&);

Csr materialize(const Snapshot& snapshot) {
  Csr g;
  const std::uint64_t bound = snapshot.logical_bound();
  g.present.assign(bound, 0);
  g.ids.assign(bound, 0);
  g.begin.assign(bound + 1, 0);
  std::vector<OffsetNeighbor> buffer;
  for (Offset v : snapshot.vertices()) {
    const std::uint64_t i = logical_id(v);
    g.present[i] = 1;
    g.ids[i] = snapshot.id_of(v);
    ++g.vertex_count;
  }
  for (std::uint64_t i = 0; i < bound; ++i) {
    g.begin[i] = g.target.size();
    if (!g.present[i]) continue;
    snapshot.neighbors_of(offset_of(i), buffer);
    for (const OffsetNeighbor& n : buffer) {
      g.target.push_back(logical_id(n.offset));
      g.weight.push_back(n.weight);
    }
  }
  g.begin[bound] = g.target.size();
  return g;
}

std::set<VertexId> khop(const Snapshot& snapshot, VertexId source, unsigned k) {
  const Offset start = require_source(snapshot, source);
  std::set<VertexId> out;
  if (k == 0) return out;
  std::vector<std::uint8_t> seen(snapshot.logical_bound(), 0);
  std::vector<Offset> frontier{start}, next;
  std::vector<OffsetNeighbor> buffer;
  seen[logical_id(start)] = 1;
  for (unsigned depth = 0; depth < k && !frontier.empty(); ++depth) {
    next.clear();
    for (Offset u : frontier) {
      snapshot.neighbors_of(u, buffer);
      for (const OffsetNeighbor& n : buffer) {
        if (seen[logical_id(n.offset)]) continue;
        seen[logical_id(n.offset)] = 1;
        out.insert(snapshot.id_of(n.offset));
        next.push_back(n.offset);
      }
    }
    frontier.swap(next);
  }
  return out;
}

AlgoResult<std::uint64_t> bfs(const Snapshot& snapshot, VertexId source) {
  const Offset start = require_source(snapshot, source);
  AlgoResult<std::uint64_t> r = empty_result(snapshot, kUnreachableHops);
  std::deque<Offset> queue{start};
  std::vector<OffsetNeighbor> buffer;
  r.values[logical_id(start)] = 0;
  while (!queue.empty()) {
    const Offset u = queue.front();
    queue.pop_front();
    const std::uint64_t du = r.values[logical_id(u)];
    snapshot.neighbors_of(u, buffer);
    for (const OffsetNeighbor& n : buffer) {
      std::uint64_t& dv = r.values[logical_id(n.offset)];
      if (dv != kUnreachableHops) continue;
      dv = du + 1;
      queue.push_back(n.offset);
    }
  }
  return r;
}

AlgoResult<double> sssp(const Snapshot& snapshot, VertexId source) {
  const Offset start = require_source(snapshot, source);
  AlgoResult<double> r = empty_result(snapshot, kUnreachableDistance);
  using Item = std::pair<double, Offset>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  std::vector<OffsetNeighbor> buffer;
  r.values[logical_id(start)] = 0.0;
  heap.push({0.0, start});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > r.values[logical_id(u)]) continue;
    snapshot.neighbors_of(u, buffer);
    for (const OffsetNeighbor& n : buffer) {
      const double candidate = d + static_cast<double>(n.weight);
      double& dv = r.values[logical_id(n.offset)];
      if (candidate < dv) {
        dv = candidate;
        heap.push({candidate, n.offset});
      }
    }
  }
  return r;
}

AlgoResult<double> pagerank(const Snapshot& snapshot, unsigned iterations, double damping, unsigned threads) {
  const Csr g = materialize(snapshot);
  AlgoResult<double> r = result_from(g, 0.0);
  if (g.vertex_count == 0) return r;
  const std::uint64_t bound = g.bound();

  // Transpose; in-edges of each vertex end up ordered by source.
  std::vector<std::uint64_t> in_begin(bound + 1, 0), in_source(g.target.size());
  for (std::uint64_t t : g.target) ++in_begin[t + 1];
  std::partial_sum(in_begin.begin(), in_begin.end(), in_begin.begin());
  std::vector<std::uint64_t> cursor(in_begin.begin(), in_begin.end() - 1);
  for (std::uint64_t u = 0; u < bound; ++u)
    for (std::uint64_t e = g.begin[u]; e < g.begin[u + 1]; ++e) in_source[cursor[g.target[e]]++] = u;

  const double n = static_cast<double>(g.vertex_count);
  std::vector<double> score(bound, 0.0), share(bound, 0.0);
  for (std::uint64_t v = 0; v < bound; ++v)
    if (g.present[v]) score[v] = 1.0 / n;
  for (unsigned it = 0; it < iterations; ++it) {
    parallel_for(bound, threads, [&](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t u = lo; u < hi; ++u) {
        const std::uint64_t out = g.begin[u + 1] - g.begin[u];
        share[u] = out == 0 ? 0.0 : score[u] / static_cast<double>(out);
      }
    });
    parallel_for(bound, threads, [&](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t v = lo; v < hi; ++v) {
        if (!g.present[v]) continue;
        double sum = 0.0;
        for (std::uint64_t e = in_begin[v]; e < in_begin[v + 1]; ++e) sum += share[in_source[e]];
        score[v] = (1.0 - damping) / n + damping * sum;
      }
    });
  }
  r.values = std::move(score);
  return r;
}

AlgoResult<std::uint64_t> wcc(const Snapshot& snapshot, unsigned threads) {
  const Csr g = materialize(snapshot);
  AlgoResult<std::uint64_t> r = result_from(g, std::uint64_t{0});
  const std::uint64_t bound = g.bound();
  // Min-label propagation over both edge directions until fixpoint.
  std::vector<std::atomic<std::uint64_t>> label(bound);
  for (std::uint64_t v = 0; v < bound; ++v) label[v].store(v, std::memory_order_relaxed);
  std::atomic<bool> changed{true};
  auto lower = [&](std::uint64_t v, std::uint64_t to) {
    std::uint64_t cur = label[v].load(std::memory_order_relaxed);
    while (to < cur) {
      if (label[v].compare_exchange_weak(cur, to, std::memory_order_relaxed)) {
        changed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  while (changed.exchange(false)) {
    parallel_for(bound, threads, [&](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t u = lo; u < hi; ++u)
        for (std::uint64_t e = g.begin[u]; e < g.begin[u + 1]; ++e) {
          const std::uint64_t v = g.target[e];
          const std::uint64_t lu = label[u].load(std::memory_order_relaxed), lv = label[v].load(std::memory_order_relaxed);
          if (lu < lv) lower(v, lu);
          else if (lv < lu) lower(u, lv);
        }
    });
    // Pointer jumping keeps the round count near the diameter's log.
    parallel_for(bound, threads, [&](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t v = lo; v < hi; ++v) {
        std::uint64_t l = label[v].load(std::memory_order_relaxed);
        const std::uint64_t ll = label[l].load(std::memory_order_relaxed);
        if (ll < l) lower(v, ll);
      }
    });
  }
  for (std::uint64_t v = 0; v < bound; ++v) r.values[v] = label[v].load(std::memory_order_relaxed);
  return r;
}

std::uint64_t triangle_count(const Snapshot& snapshot, unsigned threads) {
  const Csr g = materialize(snapshot);
  const std::uint64_t bound = g.bound();
  std::vector<std::vector<std::uint64_t>> und(bound);
  for (std::uint64_t u = 0; u < bound; ++u)
    for (std::uint64_t e = g.begin[u]; e < g.begin[u + 1]; ++e) {
      const std::uint64_t v = g.target[e];
      if (u == v) continue;
      und[u].push_back(v);
      und[v].push_back(u);
    }
  for (auto& list : und) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  std::vector<std::uint64_t> partial(std::max(1u, threads), 0);
  std::atomic<unsigned> slot{0};
  parallel_for(bound, threads, [&](std::uint64_t lo, std::uint64_t hi) {
    std::uint64_t count = 0;
    for (std::uint64_t u = lo; u < hi; ++u) {
      const auto& nu = und[u];
      for (auto it = std::upper_bound(nu.begin(), nu.end(), u); it != nu.end(); ++it) {
        const auto& nv = und[*it];
        // |{w > v : w in N(u) and N(v)}|
        auto a = std::upper_bound(nu.begin(), nu.end(), *it), b = std::upper_bound(nv.begin(), nv.end(), *it);
        while (a != nu.end() && b != nv.end()) {
          if (*a < *b) ++a;
          else if (*b < *a) ++b;
          else { ++count; ++a; ++b; }
        }
      }
    }
    partial[slot.fetch_add(1) % partial.size()] += count;
  });
  return std::accumulate(partial.begin(), partial.end(), std::uint64_t{0});
}

AlgoResult<double> betweenness(const Snapshot& snapshot, const std::vector<VertexId>& sources, unsigned threads) {
  std::vector<Offset> starts;
  starts.reserve(sources.size());
  for (VertexId s : sources) starts.push_back(require_source(snapshot, s));
  const Csr g = materialize(snapshot);
  AlgoResult<double> r = result_from(g, 0.0);
  const std::uint64_t bound = g.bound();

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(starts.size(), 1))));
  // One partial vector per source, summed in source order afterwards.
  std::vector<std::vector<double>> partial(starts.size());
  parallel_for(starts.size(), workers, [&](std::uint64_t lo, std::uint64_t hi) {
    std::vector<std::int64_t> dist(bound);
    std::vector<double> sigma(bound), delta(bound);
    std::vector<std::uint64_t> order;
    for (std::uint64_t k = lo; k < hi; ++k) {
      const std::uint64_t s = logical_id(starts[k]);
      std::fill(dist.begin(), dist.end(), -1);
      std::fill(sigma.begin(), sigma.end(), 0.0);
      std::fill(delta.begin(), delta.end(), 0.0);
      order.clear();
      dist[s] = 0;
      sigma[s] = 1.0;
      std::deque<std::uint64_t> queue{s};
      while (!queue.empty()) {
        const std::uint64_t v = queue.front();
        queue.pop_front();
        order.push_back(v);
        for (std::uint64_t e = g.begin[v]; e < g.begin[v + 1]; ++e) {
          const std::uint64_t w = g.target[e];
          if (dist[w] < 0) {
            dist[w] = dist[v] + 1;
            queue.push_back(w);
          }
          if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
        }
      }
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::uint64_t v = *it;
        for (std::uint64_t e = g.begin[v]; e < g.begin[v + 1]; ++e) {
          const std::uint64_t w = g.target[e];
          if (dist[w] == dist[v] + 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
        }
      }
      delta[s] = 0.0;
      partial[k] = delta;
    }
  });
  for (const auto& p : partial)
    for (std::uint64_t v = 0; v < bound; ++v) r.values[v] += p[v];
  return r;
}

}  // namespace sortgraph::analytics
