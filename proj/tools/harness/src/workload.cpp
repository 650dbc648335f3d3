#include "sortgraph/harness/workload.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <functional>
#include <random>
#include <thread>
#include <unordered_map>

#include "sortgraph/error.hpp"
#include "sortgraph/harness/generators.hpp"

namespace sortgraph::harness {

WorkloadKind parse_workload_kind(std::string_view name) {
  if (name == "insert") return WorkloadKind::insert;
  if (name == "delete") return WorkloadKind::remove;
  if (name == "mixed") return WorkloadKind::mixed;
  if (name == "vertex-ids" || name == "vertex_ids") return WorkloadKind::vertex_ids;
  raise(ErrorCode::invalid_argument, "unknown workload '" + std::string(name) + "'");
}

std::string_view to_string(WorkloadKind k) noexcept {
  switch (k) {
    case WorkloadKind::insert: return "insert";
    case WorkloadKind::remove: return "delete";
    case WorkloadKind::mixed: return "mixed";
    case WorkloadKind::vertex_ids: return "vertex-ids";
  }
  return "?";
}

std::uint64_t Plan::op_count() const {
  std::uint64_t n = 0;
  for (const auto& ops : per_thread) n += ops.size();
  return n;
}

namespace {

std::vector<EdgeRecord> shuffled(const std::vector<EdgeRecord>& edges, std::uint64_t seed) {
  std::vector<EdgeRecord> out(edges);
  std::mt19937_64 rng(seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

unsigned clamp_threads(unsigned threads) { return std::max(1u, threads); }

}  // namespace

Plan plan_insert(const std::vector<EdgeRecord>& edges, unsigned threads, std::uint64_t seed, bool undirected) {
  threads = clamp_threads(threads);
  Plan plan;
  plan.per_thread.resize(threads);
  const std::vector<EdgeRecord> order = shuffled(edges, seed);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const EdgeRecord& e = order[i];
    auto& ops = plan.per_thread[i % threads];
    ops.push_back({OpKind::insert_edge, e.src, e.dst, e.weight});
    if (undirected) ops.push_back({OpKind::insert_edge, e.dst, e.src, e.weight});
  }
  return plan;
}

Plan plan_delete(const std::vector<EdgeRecord>& edges, unsigned threads, std::uint64_t seed) {
  threads = clamp_threads(threads);
  Plan plan;
  plan.per_thread.resize(threads);
  plan.preload = edges;
  const std::vector<EdgeRecord> order = shuffled(edges, seed);
  for (std::size_t i = 0; i < order.size(); ++i)
    plan.per_thread[i % threads].push_back({OpKind::delete_edge, order[i].src, order[i].dst, kTombstone});
  return plan;
}

Plan plan_mixed(const std::vector<EdgeRecord>& edges, unsigned threads, std::uint64_t seed, std::uint64_t ops,
                double insert_ratio) {
  threads = clamp_threads(threads);
  Plan plan;
  plan.per_thread.resize(threads);
  std::vector<std::vector<EdgeRecord>> part(threads);
  const std::hash<VertexId> hash;
  for (const EdgeRecord& e : shuffled(edges, seed)) part[(hash(e.src) * 31 + hash(e.dst)) % threads].push_back(e);

  for (unsigned k = 0; k < threads; ++k) {
    std::mt19937_64 rng(seed + 1 + k);
    std::bernoulli_distribution coin(insert_ratio);
    std::vector<EdgeRecord> live(part[k].begin(), part[k].begin() + part[k].size() / 2);
    std::vector<EdgeRecord> reserve(part[k].begin() + part[k].size() / 2, part[k].end());
    plan.preload.insert(plan.preload.end(), live.begin(), live.end());
    const std::uint64_t quota = ops / threads + (k < ops % threads ? 1 : 0);
    auto take = [&](std::vector<EdgeRecord>& from) {
      std::uniform_int_distribution<std::size_t> pick(0, from.size() - 1);
      const std::size_t i = pick(rng);
      const EdgeRecord e = from[i];
      from[i] = from.back();
      from.pop_back();
      return e;
    };
    for (std::uint64_t i = 0; i < quota; ++i) {
      const bool insert = (coin(rng) && !reserve.empty()) || live.empty();
      if (insert && reserve.empty()) break;
      if (insert) {
        const EdgeRecord e = take(reserve);
        plan.per_thread[k].push_back({OpKind::insert_edge, e.src, e.dst, e.weight});
        live.push_back(e);
      } else {
        const EdgeRecord e = take(live);
        plan.per_thread[k].push_back({OpKind::delete_edge, e.src, e.dst, kTombstone});
        reserve.push_back(e);
      }
    }
  }
  return plan;
}

Plan plan_vertices(const std::vector<VertexId>& ids, unsigned threads) {
  threads = clamp_threads(threads);
  Plan plan;
  plan.per_thread.resize(threads);
  for (std::size_t i = 0; i < ids.size(); ++i)
    plan.per_thread[i % threads].push_back({OpKind::insert_vertex, ids[i], 0, 0.0f});
  return plan;
}

Plan build_plan(const Workload& w, const std::optional<std::vector<EdgeRecord>>& graph) {
  if (w.kind == WorkloadKind::vertex_ids)
    return plan_vertices(gen_ids(w.distribution, w.size, w.bits, w.seed), w.threads);

  std::vector<EdgeRecord> edges;
  if (graph) {
    edges = *graph;
    if (w.size > 0 && w.kind != WorkloadKind::mixed && edges.size() > w.size) edges.resize(w.size);
  } else {
    const std::uint64_t m = std::max<std::uint64_t>(w.size, 1);
    const std::uint64_t n = std::max<std::uint64_t>(m / 8, 16);
    const std::vector<VertexId> ids = gen_ids(w.distribution, n, w.bits, w.seed);
    std::vector<EdgeRecord> base = power_law_edges(ids, m, 2.2, w.seed);
    edges = std::move(base);
  }
  switch (w.kind) {
    case WorkloadKind::insert: return plan_insert(edges, w.threads, w.seed);
    case WorkloadKind::remove: return plan_delete(edges, w.threads, w.seed);
    case WorkloadKind::mixed: return plan_mixed(edges, w.threads, w.seed, w.size, w.insert_ratio);
    case WorkloadKind::vertex_ids: break;
  }
  return {};
}

bool apply_checked(GraphStore& g, const Op& op) {
  try {
    switch (op.kind) {
      case OpKind::insert_vertex: g.insert_vertex(op.src); break;
      case OpKind::delete_vertex: g.delete_vertex(op.src); break;
      case OpKind::insert_edge: g.insert_edge(op.src, op.dst, op.weight); break;
      case OpKind::update_edge: g.update_edge(op.src, op.dst, op.weight); break;
      case OpKind::delete_edge: g.delete_edge(op.src, op.dst); break;
    }
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::not_found || e.code() == ErrorCode::already_deleted) return false;
    throw;
  }
}

void apply(GraphStore& g, const Op& op) { apply_checked(g, op); }

WorkloadReport run_workload(GraphStore& g, const Plan& plan, unsigned windows) {
  for (const EdgeRecord& e : plan.preload) g.insert_edge(e.src, e.dst, e.weight);

  WorkloadReport report;
  const std::size_t threads = plan.per_thread.size();
  report.ops = plan.op_count();
  if (threads == 0 || report.ops == 0) return report;
  windows = std::max(1u, windows);

  std::barrier sync(static_cast<std::ptrdiff_t>(threads + 1));
  std::vector<std::uint64_t> failed(threads, 0);
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < threads; ++k) {
    pool.emplace_back([&, k] {
      const auto& ops = plan.per_thread[k];
      for (unsigned w = 0; w < windows; ++w) {
        const std::size_t lo = ops.size() * w / windows, hi = ops.size() * (w + 1) / windows;
        sync.arrive_and_wait();
        for (std::size_t i = lo; i < hi; ++i)
          if (!apply_checked(g, ops[i])) ++failed[k];
        sync.arrive_and_wait();
      }
    });
  }
  using Clock = std::chrono::steady_clock;
  for (unsigned w = 0; w < windows; ++w) {
    // Workers cannot start before this thread arrives, so read the clock
    // first; after the release a worker may finish before we are scheduled.
    const auto start = Clock::now();
    sync.arrive_and_wait();
    sync.arrive_and_wait();
    WindowSample s;
    s.window = w;
    s.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    for (const auto& ops : plan.per_thread) s.ops += ops.size() * (w + 1) / windows - ops.size() * w / windows;
    s.throughput = s.seconds > 0 ? static_cast<double>(s.ops) / s.seconds : 0.0;
    report.seconds += s.seconds;
    report.series.push_back(s);
  }
  for (std::thread& t : pool) t.join();
  for (std::uint64_t f : failed) report.failed_ops += f;
  report.throughput = report.seconds > 0 ? static_cast<double>(report.ops) / report.seconds : 0.0;
  return report;
}

std::vector<Op> sequential_ops(const Plan& plan) {
  std::vector<Op> out;
  for (const EdgeRecord& e : plan.preload) out.push_back({OpKind::insert_edge, e.src, e.dst, e.weight});
  for (const auto& ops : plan.per_thread) out.insert(out.end(), ops.begin(), ops.end());
  return out;
}

}  // namespace sortgraph::harness
