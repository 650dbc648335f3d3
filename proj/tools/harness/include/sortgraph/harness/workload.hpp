#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sortgraph/graph_store.hpp"
#include "sortgraph/harness/edge_list.hpp"
#include "sortgraph/harness/ids.hpp"

namespace sortgraph::harness {

enum class WorkloadKind { insert, remove, mixed, vertex_ids };

WorkloadKind parse_workload_kind(std::string_view name);
std::string_view to_string(WorkloadKind k) noexcept;

struct Workload {
  WorkloadKind kind = WorkloadKind::insert;
  std::uint64_t seed = 1;
  Distribution distribution = Distribution::uniform;
  std::uint64_t size = 0;  // op count
  unsigned threads = 1;
  // Share of inserts in a mixed workload.
  double insert_ratio = 0.5;
  unsigned bits = 32;
};

enum class OpKind : std::uint8_t { insert_vertex, delete_vertex, insert_edge, update_edge, delete_edge };

struct Op {
  OpKind kind;
  VertexId src;
  VertexId dst;
  Weight weight;
};

// Per-thread op lists plus edges that must exist before the timed run.
struct Plan {
  std::vector<std::vector<Op>> per_thread;
  std::vector<EdgeRecord> preload;

  std::uint64_t op_count() const;
};

// Edges are shuffled and dealt round-robin. With `undirected` every edge is
// also applied reversed by the same thread.
Plan plan_insert(const std::vector<EdgeRecord>& edges, unsigned threads, std::uint64_t seed, bool undirected = false);
Plan plan_delete(const std::vector<EdgeRecord>& edges, unsigned threads, std::uint64_t seed);
// Keys are partitioned across threads so the final graph does not depend on
// interleaving. Half of each partition is preloaded; each op then inserts a
// reserve edge (probability insert_ratio) or deletes a live one.
Plan plan_mixed(const std::vector<EdgeRecord>& edges, unsigned threads, std::uint64_t seed, std::uint64_t ops,
                double insert_ratio);
Plan plan_vertices(const std::vector<VertexId>& ids, unsigned threads);

// Builds the plan for a workload: edges from `graph` when given, otherwise a
// generated power-law edge set whose ids follow workload.distribution.
Plan build_plan(const Workload& w, const std::optional<std::vector<EdgeRecord>>& graph);

struct WindowSample {
  std::uint64_t window = 0;
  std::uint64_t ops = 0;
  double seconds = 0.0;
  double throughput = 0.0;
};

struct WorkloadReport {
  std::uint64_t ops = 0;
  std::uint64_t failed_ops = 0;  // ops the store rejected (e.g. missing endpoint)
  double seconds = 0.0;
  double throughput = 0.0;
  std::vector<WindowSample> series;
};

void apply(GraphStore& g, const Op& op);

// Runs the plan across its threads in `windows` lockstep windows. The
// preload is applied first and is not timed.
WorkloadReport run_workload(GraphStore& g, const Plan& plan, unsigned windows = 10);

// Ops a sequential replay of the plan applies to a fresh oracle, in order.
std::vector<Op> sequential_ops(const Plan& plan);

}  // namespace sortgraph::harness
