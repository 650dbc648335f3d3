#include "sortgraph/harness/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>
#include <random>
#include <set>
#include <sstream>

#include "sortgraph/error.hpp"
#include "sortgraph/harness/generators.hpp"
#include "sortgraph/harness/ids.hpp"

namespace sortgraph::harness {

void LinearizationRecorder::attach(GraphStore& g) {
  g.set_observer([this](const Mutation& m) { record(m); });
}

void LinearizationRecorder::record(const Mutation& m) {
  std::lock_guard lock(mutex_);
  log_.push_back(m);
}

std::vector<Mutation> LinearizationRecorder::sorted() const {
  std::vector<Mutation> out;
  {
    std::lock_guard lock(mutex_);
    out = log_;
  }
  std::sort(out.begin(), out.end(), [](const Mutation& a, const Mutation& b) { return a.time < b.time; });
  return out;
}

std::size_t LinearizationRecorder::size() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

OracleGraph replay(const std::vector<Mutation>& linearization) {
  OracleGraph oracle;
  for (const Mutation& m : linearization) oracle.apply(m);
  return oracle;
}

namespace {

std::vector<Neighbor> by_id(std::vector<Neighbor> v) {
  std::sort(v.begin(), v.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
  return v;
}

std::string describe(const std::vector<Neighbor>& v) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < v.size() && i < 8; ++i) out << (i ? " " : "") << v[i].id << ':' << v[i].weight;
  if (v.size() > 8) out << " ... (" << v.size() << ")";
  out << ']';
  return out.str();
}

}  // namespace

std::string compare_snapshot(const Snapshot& snapshot, const OracleGraph& oracle) {
  const Timestamp t = snapshot.timestamp();
  std::vector<VertexId> ids;
  for (Offset v : snapshot.vertices()) ids.push_back(snapshot.id_of(v));
  std::sort(ids.begin(), ids.end());
  const std::vector<VertexId> expected = oracle.vertices(t);
  if (ids != expected) {
    std::ostringstream out;
    out << "t=" << t << ": store has " << ids.size() << " visible vertices, oracle " << expected.size();
    return out.str();
  }
  for (VertexId id : ids) {
    const auto got = by_id(snapshot.neighbors(id));
    const auto want = oracle.neighbors(id, t);
    if (got != want) {
      std::ostringstream out;
      out << "t=" << t << " vertex " << id << ": store " << describe(got) << " oracle " << describe(want);
      return out.str();
    }
  }
  return {};
}

TraceReport run_oracle_trace(const TraceOptions& options, GraphOptions graph_options) {
  TraceReport report;
  GraphStore g(graph_options);
  OracleGraph oracle;
  std::vector<Mutation> emitted;
  g.set_observer([&](const Mutation& m) { emitted.push_back(m); });

  std::mt19937_64 rng(options.seed);
  const std::vector<VertexId> pool = gen_ids(Distribution::uniform, options.vertex_pool, options.bits, options.seed);
  std::uniform_int_distribution<std::size_t> pick_vertex(0, pool.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<float> weight(0.5f, 10.0f);
  std::vector<std::pair<VertexId, VertexId>> written;  // edge keys seen so far
  std::set<VertexId> ever_created;

  auto live = [&](VertexId id) { return oracle.vertex_visible(id, oracle.last_time() + 1); };
  auto fail = [&](std::string what) {
    if (report.mismatches.size() < 20) report.mismatches.push_back(std::move(what));
  };

  std::vector<Snapshot> snapshots;
  const std::uint64_t every = std::max<std::uint64_t>(1, options.ops / std::max<std::uint64_t>(options.samples, 1));

  for (std::uint64_t i = 0; i < options.ops; ++i) {
    const double r = unit(rng);
    Mutation want{};
    VertexId a = pool[pick_vertex(rng)], b = pool[pick_vertex(rng)];
    if (r >= 0.12 && r < 0.60 && unit(rng) < 0.5 && !written.empty()) {
      // Revisit a known key so that updates and deletes hit real edges.
      std::uniform_int_distribution<std::size_t> pick(0, written.size() - 1);
      std::tie(a, b) = written[pick(rng)];
    }
    if (r < 0.08) want = {MutationKind::insert_vertex, a, 0, 0.0f, 0};
    else if (r < 0.12) want = {MutationKind::delete_vertex, a, 0, 0.0f, 0};
    else if (r < 0.60) want = {MutationKind::insert_edge, a, b, weight(rng), 0};
    else if (r < 0.80) want = {MutationKind::update_edge, a, b, weight(rng), 0};
    else want = {MutationKind::delete_edge, a, b, 0.0f, 0};

    // Predict the outcome from the oracle before touching the store.
    std::vector<Mutation> expected;
    std::set<ErrorCode> allowed;
    switch (want.kind) {
      case MutationKind::insert_vertex:
        if (!live(a)) expected.push_back(want);
        break;
      case MutationKind::delete_vertex:
        if (live(a)) expected.push_back(want);
        else if (ever_created.contains(a)) allowed = {ErrorCode::already_deleted, ErrorCode::not_found};
        else allowed = {ErrorCode::not_found};
        break;
      case MutationKind::insert_edge:
        if (!live(a)) expected.push_back({MutationKind::insert_vertex, a, 0, 0.0f, 0});
        if (!live(b) && b != a) expected.push_back({MutationKind::insert_vertex, b, 0, 0.0f, 0});
        expected.push_back(want);
        break;
      case MutationKind::update_edge:
      case MutationKind::delete_edge:
        if (live(a) && live(b)) expected.push_back(want);
        else allowed = {ErrorCode::not_found};
        break;
    }

    emitted.clear();
    std::optional<ErrorCode> error;
    try {
      switch (want.kind) {
        case MutationKind::insert_vertex: g.insert_vertex(a); break;
        case MutationKind::delete_vertex: g.delete_vertex(a); break;
        case MutationKind::insert_edge: g.insert_edge(a, b, want.weight); break;
        case MutationKind::update_edge: g.update_edge(a, b, want.weight); break;
        case MutationKind::delete_edge: g.delete_edge(a, b); break;
      }
    } catch (const Error& e) {
      error = e.code();
    }
    ++report.ops;

    [&] {
      if (!allowed.empty()) {
        if (!error || !allowed.contains(*error))
          fail("op " + std::to_string(i) + " (" + std::string(to_string(want.kind)) + ") should have failed");
        else
          ++report.rejected;
        if (!emitted.empty()) fail("op " + std::to_string(i) + " failed but reported mutations");
        return;
      }
      if (error) {
        fail("op " + std::to_string(i) + " (" + std::string(to_string(want.kind)) + ") failed with " +
             std::string(to_string(*error)));
        return;
      }
      bool same = emitted.size() == expected.size();
      for (std::size_t k = 0; same && k < expected.size(); ++k) {
        const Mutation& e = expected[k];
        const Mutation& m = emitted[k];
        same = e.kind == m.kind && e.src == m.src && e.dst == m.dst && e.weight == m.weight &&
               (k == 0 || emitted[k - 1].time < m.time);
      }
      if (!same) {
        fail("op " + std::to_string(i) + " (" + std::string(to_string(want.kind)) + ") reported unexpected mutations");
        return;
      }
      for (const Mutation& m : emitted) {
        oracle.apply(m);
        ++report.mutations;
        if (m.kind == MutationKind::insert_vertex) ever_created.insert(m.src);
        if (m.kind == MutationKind::insert_edge) written.emplace_back(m.src, m.dst);
      }
    }();

    if ((i + 1) % every == 0 && snapshots.size() < options.samples) {
      snapshots.push_back(g.snapshot());
      if (snapshots.back().timestamp() < oracle.last_time())
        fail("snapshot timestamp " + std::to_string(snapshots.back().timestamp()) + " precedes last write " +
             std::to_string(oracle.last_time()));
      // A current read of a random vertex.
      const VertexId probe = pool[pick_vertex(rng)];
      try {
        const auto got = by_id(g.get_neighbors(probe));
        if (!live(probe)) fail("vertex " + std::to_string(probe) + " readable while deleted");
        else if (got != oracle.neighbors(probe, oracle.last_time())) fail("current read of " + std::to_string(probe));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::not_visible || live(probe)) fail("current read of " + std::to_string(probe) + " raised");
      }
      ++report.reads_checked;
    }
  }

  // Historical views, after everything that followed them has been applied.
  for (const Snapshot& s : snapshots) {
    std::string diff = compare_snapshot(s, oracle);
    if (!diff.empty()) fail(std::move(diff));
    ++report.samples_checked;
    for (int k = 0; k < 16; ++k) {
      const VertexId probe = pool[pick_vertex(rng)];
      const bool visible = oracle.vertex_visible(probe, s.timestamp());
      try {
        const auto got = by_id(g.get_neighbors(probe, s.timestamp()));
        if (!visible || got != oracle.neighbors(probe, s.timestamp()))
          fail("read of " + std::to_string(probe) + " at t=" + std::to_string(s.timestamp()));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::not_visible || visible)
          fail("read of " + std::to_string(probe) + " at t=" + std::to_string(s.timestamp()) + " raised " +
               std::string(to_string(e.code())));
      }
      ++report.reads_checked;
    }
  }
  {
    const Snapshot now = g.snapshot();
    std::string diff = compare_snapshot(now, oracle);
    if (!diff.empty()) fail("final state: " + diff);
  }
  return report;
}

namespace {

struct ObservedRead {
  Timestamp t;
  VertexId id;
  bool visible;
  std::vector<Neighbor> neighbors;
};

}  // namespace

ConcurrentReport run_concurrent_check(const ConcurrentOptions& options, GraphOptions graph_options) {
  ConcurrentReport report;
  GraphStore g(graph_options);
  LinearizationRecorder recorder;
  recorder.attach(g);

  const DenseGraph base = dota_like(options.vertices, options.avg_degree, options.seed);
  for (const EdgeRecord& e : base.edges) g.insert_edge(e.src, e.dst, e.weight);
  const std::vector<VertexId>& pool = base.vertices;

  std::atomic<bool> stop{false};
  std::vector<std::uint64_t> writer_ops(options.writers, 0);
  std::vector<std::vector<ObservedRead>> reads(options.readers);
  std::vector<std::uint64_t> snapshots(options.readers, 0);
  std::vector<std::string> errors(options.writers + options.readers);

  std::vector<std::thread> threads;
  for (unsigned k = 0; k < options.writers; ++k) {
    threads.emplace_back([&, k] {
      std::mt19937_64 rng(options.seed * 7919 + k);
      std::uniform_int_distribution<std::size_t> pick_vertex(0, pool.size() - 1);
      std::uniform_int_distribution<std::size_t> pick_edge(0, base.edges.size() - 1);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::uniform_real_distribution<float> weight(0.5f, 10.0f);
      try {
        while (!stop.load(std::memory_order_relaxed)) {
          const double r = unit(rng);
          VertexId a = pool[pick_vertex(rng)], b = pool[pick_vertex(rng)];
          if (unit(rng) < 0.5) {
            const EdgeRecord& e = base.edges[pick_edge(rng)];
            a = e.src;
            b = e.dst;
          }
          try {
            if (r < options.vertex_churn / 2) g.delete_vertex(a);
            else if (r < options.vertex_churn) g.insert_vertex(a);
            else if (r < 0.55) g.insert_edge(a, b, weight(rng));
            else if (r < 0.75) g.update_edge(a, b, weight(rng));
            else g.delete_edge(a, b);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::not_found && e.code() != ErrorCode::already_deleted) throw;
          }
          ++writer_ops[k];
        }
      } catch (const std::exception& e) {
        errors[k] = std::string("writer: ") + e.what();
      }
    });
  }
  for (unsigned k = 0; k < options.readers; ++k) {
    threads.emplace_back([&, k] {
      std::mt19937_64 rng(options.seed * 104729 + k);
      std::uniform_int_distribution<std::size_t> pick_vertex(0, pool.size() - 1);
      try {
        while (!stop.load(std::memory_order_relaxed)) {
          Snapshot s = g.snapshot();
          ++snapshots[k];
          for (int i = 0; i < 4 && reads[k].size() < options.reads_per_reader; ++i) {
            ObservedRead read{s.timestamp(), pool[pick_vertex(rng)], true, {}};
            try {
              read.neighbors = by_id(s.neighbors(read.id));
            } catch (const Error& e) {
              if (e.code() != ErrorCode::not_visible) throw;
              read.visible = false;
            }
            reads[k].push_back(std::move(read));
          }
          s.release();
          if (reads[k].size() >= options.reads_per_reader) std::this_thread::yield();
        }
      } catch (const std::exception& e) {
        errors[options.writers + k] = std::string("reader: ") + e.what();
      }
    });
  }
  const auto start = std::chrono::steady_clock::now();
  std::this_thread::sleep_for(std::chrono::duration<double>(options.seconds));
  stop.store(true);
  for (std::thread& t : threads) t.join();
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (const std::string& e : errors)
    if (!e.empty() && report.mismatches.size() < 20) report.mismatches.push_back(e);
  for (std::uint64_t n : writer_ops) report.writer_ops += n;
  for (std::uint64_t n : snapshots) report.snapshots += n;

  const std::vector<Mutation> linearization = recorder.sorted();
  report.mutations = linearization.size();
  std::vector<const ObservedRead*> all;
  for (const auto& list : reads)
    for (const ObservedRead& r : list) all.push_back(&r);
  std::sort(all.begin(), all.end(), [](const ObservedRead* a, const ObservedRead* b) { return a->t < b->t; });

  // Replay and check reads as the oracle reaches each read timestamp.
  OracleGraph oracle;
  std::size_t next = 0;
  auto check_until = [&](Timestamp limit) {
    for (; next < all.size() && all[next]->t < limit; ++next) {
      const ObservedRead& r = *all[next];
      const bool visible = oracle.vertex_visible(r.id, r.t);
      bool same = visible == r.visible;
      if (same && visible) same = oracle.neighbors(r.id, r.t) == r.neighbors;
      if (!same && report.mismatches.size() < 20)
        report.mismatches.push_back("read of " + std::to_string(r.id) + " at t=" + std::to_string(r.t) +
                                    " disagrees with the oracle");
      ++report.reads_checked;
    }
  };
  for (const Mutation& m : linearization) {
    check_until(m.time);
    try {
      oracle.apply(m);
    } catch (const Error& e) {
      if (report.mismatches.size() < 20)
        report.mismatches.push_back("linearization rejected " + std::string(to_string(m.kind)) + " at t=" +
                                    std::to_string(m.time) + ": " + e.what());
    }
  }
  check_until(~Timestamp{0});
  return report;
}

}  // namespace sortgraph::harness
