#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sortgraph/analytics.hpp"
#include "sortgraph/graph_store.hpp"
#include "sortgraph/harness/generators.hpp"
#include "sortgraph/harness/workload.hpp"

namespace sortgraph {
namespace {

GraphOptions quiet() {
  GraphOptions o;
  o.reoptimize = ReoptimizeMode::disabled;
  return o;
}

const std::vector<harness::EdgeRecord>& edges() {
  static const auto e = harness::power_law_edges(20000, 200000, 2.1, 1);
  return e;
}

void BM_EdgeInsert(benchmark::State& state) {
  const auto threads = static_cast<unsigned>(state.range(0));
  const harness::Plan plan = harness::plan_insert(edges(), threads, 1);
  double seconds = 0.0;
  for (auto _ : state) {
    GraphStore g(quiet());
    const harness::WorkloadReport r = harness::run_workload(g, plan, 1);
    seconds = r.seconds;
    state.SetIterationTime(seconds);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * plan.op_count()));
}
BENCHMARK(BM_EdgeInsert)->Arg(1)->Arg(4)->UseManualTime()->Unit(benchmark::kMillisecond);

void BM_MixedUpdates(benchmark::State& state) {
  const harness::Plan plan = harness::plan_mixed(edges(), 1, 1, 100000, 0.5);
  for (auto _ : state) {
    GraphStore g(quiet());
    state.SetIterationTime(harness::run_workload(g, plan, 1).seconds);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * plan.op_count()));
}
BENCHMARK(BM_MixedUpdates)->UseManualTime()->Unit(benchmark::kMillisecond);

// Appends to one vertex; each doubling triggers a compaction.
void BM_HotVertexAppend(benchmark::State& state) {
  GraphStore g(quiet());
  std::mt19937_64 rng(3);
  for (VertexId v = 0; v < 4096; ++v) g.insert_vertex(v);
  for (auto _ : state) g.insert_edge(0, rng() % 4096, 1.0f);
  state.SetItemsProcessed(state.iterations());
  state.counters["visits_per_op"] =
      static_cast<double>(g.edge_stats().blocks_visited) / static_cast<double>(state.iterations());
}
BENCHMARK(BM_HotVertexAppend);

struct Loaded {
  Loaded() : g(quiet()) {
    for (const auto& e : edges()) g.insert_edge(e.src, e.dst, e.weight);
    s.emplace(g.snapshot());
    for (Offset v : s->vertices()) ids.push_back(s->id_of(v));
  }
  GraphStore g;
  std::optional<Snapshot> s;
  std::vector<VertexId> ids;
};

Loaded& loaded() {
  static Loaded l;
  return l;
}

void BM_Neighbors(benchmark::State& state) {
  Loaded& l = loaded();
  std::mt19937_64 rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(l.s->neighbors(l.ids[rng() % l.ids.size()]));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Neighbors);

void BM_Bfs(benchmark::State& state) {
  Loaded& l = loaded();
  std::mt19937_64 rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(analytics::bfs(*l.s, l.ids[rng() % l.ids.size()]));
}
BENCHMARK(BM_Bfs)->Unit(benchmark::kMillisecond);

void BM_PageRank(benchmark::State& state) {
  Loaded& l = loaded();
  for (auto _ : state) benchmark::DoNotOptimize(analytics::pagerank(*l.s, 20, 0.85));
}
BENCHMARK(BM_PageRank)->Unit(benchmark::kMillisecond);

void BM_Wcc(benchmark::State& state) {
  Loaded& l = loaded();
  for (auto _ : state) benchmark::DoNotOptimize(analytics::wcc(*l.s));
}
BENCHMARK(BM_Wcc)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace sortgraph
