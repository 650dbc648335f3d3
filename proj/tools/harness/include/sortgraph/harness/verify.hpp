#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "sortgraph/graph_store.hpp"
#include "sortgraph/mutation.hpp"
#include "sortgraph/reference_oracle.hpp"

namespace sortgraph::harness {

// Collects the store's mutations from any number of threads; sorted by
// timestamp they form the linearization replayed into the oracle.
class LinearizationRecorder {
 public:
  void attach(GraphStore& g);
  void record(const Mutation& m);
  std::vector<Mutation> sorted() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Mutation> log_;
};

OracleGraph replay(const std::vector<Mutation>& linearization);

// Compares every visible vertex's neighbor list at the snapshot against the
// oracle. Returns an empty string on agreement, else a description.
std::string compare_snapshot(const Snapshot& snapshot, const OracleGraph& oracle);

struct TraceOptions {
  std::uint64_t ops = 100000;
  std::uint64_t seed = 1;
  std::uint64_t vertex_pool = 2000;
  std::uint64_t samples = 50;  // snapshots taken during the trace
  unsigned bits = 32;
};

struct TraceReport {
  std::uint64_t ops = 0;
  std::uint64_t mutations = 0;
  std::uint64_t rejected = 0;  // ops that failed with the expected error
  std::uint64_t samples_checked = 0;
  std::uint64_t reads_checked = 0;
  std::vector<std::string> mismatches;

  bool ok() const { return mismatches.empty(); }
};

// Single-threaded randomized trace of vertex and edge mutations. Each op's
// outcome (success or error code) is predicted from the oracle; snapshots
// taken at sampled points, and explicit-timestamp reads, are checked
// against the oracle's historical view.
TraceReport run_oracle_trace(const TraceOptions& options, GraphOptions graph_options = {});

struct ConcurrentOptions {
  unsigned writers = 32;
  unsigned readers = 32;
  double seconds = 10.0;
  std::uint64_t seed = 1;
  std::uint64_t vertices = 2000;
  std::uint64_t avg_degree = 64;
  // Share of writer ops that delete or re-create a vertex.
  double vertex_churn = 0.02;
  std::uint64_t reads_per_reader = 20000;
};

struct ConcurrentReport {
  std::uint64_t writer_ops = 0;
  std::uint64_t mutations = 0;
  std::uint64_t snapshots = 0;
  std::uint64_t reads_checked = 0;
  double seconds = 0.0;
  std::vector<std::string> mismatches;

  bool ok() const { return mismatches.empty(); }
};

// Writers mutate a dense synthetic graph while readers take snapshots and
// read neighbor lists through them. Afterwards the recorded mutations are
// replayed in timestamp order and every read is checked against the
// oracle at its snapshot's timestamp.
ConcurrentReport run_concurrent_check(const ConcurrentOptions& options, GraphOptions graph_options = {});

}  // namespace sortgraph::harness
