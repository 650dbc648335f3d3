#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <barrier>
#include <random>
#include <set>
#include <thread>
#include <vector>

#include "sortgraph/error.hpp"
#include "sortgraph/graph_store.hpp"
#include "sortgraph/harness/memory.hpp"
#include "sortgraph/harness/verify.hpp"

namespace sortgraph {
namespace {

using harness::LinearizationRecorder;

std::vector<Neighbor> sorted(std::vector<Neighbor> v) {
  std::sort(v.begin(), v.end(), [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
  return v;
}

TEST(Concurrency, DenseWorkloadReadsMatchTheOracle) {
  harness::ConcurrentOptions o;
  o.writers = 4;
  o.readers = 4;
  o.seconds = 1.0;
  o.vertices = 300;
  o.avg_degree = 16;
  o.reads_per_reader = 2000;
  const harness::ConcurrentReport r = harness::run_concurrent_check(o);
  for (const auto& m : r.mismatches) ADD_FAILURE() << m;
  EXPECT_GT(r.mutations, 0u);
  EXPECT_GT(r.reads_checked, 0u);
  EXPECT_GT(r.snapshots, 0u);
}

TEST(Concurrency, HighChurnAndTinySegments) {
  harness::ConcurrentOptions o;
  o.writers = 6;
  o.readers = 3;
  o.seconds = 1.0;
  o.vertices = 64;
  o.avg_degree = 8;
  o.vertex_churn = 0.3;
  o.seed = 5;
  GraphOptions g;
  g.initial_segment_blocks = 1;
  g.bitmap_segment_bits = 2;
  const harness::ConcurrentReport r = harness::run_concurrent_check(o, g);
  for (const auto& m : r.mismatches) ADD_FAILURE() << m;
  EXPECT_GT(r.reads_checked, 0u);
}

TEST(Concurrency, DuplicateVertexInsertHasOneWinner) {
  for (int round = 0; round < 20; ++round) {
    GraphStore g;
    LinearizationRecorder rec;
    rec.attach(g);
    std::barrier sync(8);
    std::vector<Offset> got(8);
    std::vector<std::thread> pool;
    for (int k = 0; k < 8; ++k)
      pool.emplace_back([&, k] {
        sync.arrive_and_wait();
        got[k] = g.insert_vertex(77);
      });
    for (auto& t : pool) t.join();
    EXPECT_EQ(rec.size(), 1u);
    EXPECT_EQ(std::set<Offset>(got.begin(), got.end()).size(), 1u);
    EXPECT_EQ(g.vertex_count(), 1u);
  }
}

TEST(Concurrency, DeleteVertexRaceHasOneWinner) {
  for (int round = 0; round < 20; ++round) {
    GraphStore g;
    g.insert_edge(1, 2, 1.0f);
    std::barrier sync(6);
    std::atomic<int> ok{0}, rejected{0};
    std::vector<std::thread> pool;
    for (int k = 0; k < 6; ++k)
      pool.emplace_back([&] {
        sync.arrive_and_wait();
        try {
          g.delete_vertex(1);
          ++ok;
        } catch (const Error& e) {
          if (e.code() == ErrorCode::already_deleted || e.code() == ErrorCode::not_found) ++rejected;
        }
      });
    for (auto& t : pool) t.join();
    EXPECT_EQ(ok.load(), 1);
    EXPECT_EQ(rejected.load(), 5);
    EXPECT_EQ(g.vertex_count(), 1u);
  }
}

TEST(Concurrency, EdgeWritesRacingVertexDeletion) {
  // An edge write either lands before the deletion or fails; never after.
  for (int round = 0; round < 10; ++round) {
    GraphStore g;
    LinearizationRecorder rec;
    rec.attach(g);
    for (VertexId v = 0; v < 20; ++v) g.insert_edge(v, v + 1, 1.0f);
    std::atomic<bool> stop{false};
    std::vector<std::thread> pool;
    for (int k = 0; k < 3; ++k)
      pool.emplace_back([&, k] {
        std::mt19937_64 rng(k);
        while (!stop.load()) {
          try {
            g.update_edge(rng() % 21, rng() % 21, 2.0f);
          } catch (const Error& e) {
            ASSERT_EQ(e.code(), ErrorCode::not_found);
          }
        }
      });
    for (VertexId v = 0; v < 21; v += 2) g.delete_vertex(v);
    stop = true;
    for (auto& t : pool) t.join();
    const OracleGraph oracle = harness::replay(rec.sorted());
    const Snapshot s = g.snapshot();
    EXPECT_EQ(harness::compare_snapshot(s, oracle), "");
  }
}

TEST(Concurrency, HotVertexAppendsKeepSnapshotsStable) {
  GraphStore g;
  g.insert_vertex(0);
  for (VertexId v = 1; v <= 64; ++v) g.insert_edge(0, v, 1.0f);
  Snapshot before = g.snapshot();
  const auto expected = sorted(before.neighbors(0));
  std::atomic<bool> stop{false};
  std::vector<std::thread> writers;
  for (int k = 0; k < 4; ++k)
    writers.emplace_back([&, k] {
      std::mt19937_64 rng(k);
      for (int i = 0; i < 20000; ++i) {
        const VertexId dst = 1 + rng() % 64;
        if (rng() % 3 == 0) g.delete_edge(0, dst);
        else g.insert_edge(0, dst, static_cast<Weight>(2 + rng() % 5));
      }
    });
  std::thread reader([&] {
    while (!stop.load()) ASSERT_EQ(sorted(before.neighbors(0)), expected);
  });
  for (auto& t : writers) t.join();
  stop = true;
  reader.join();
  EXPECT_GT(g.edge_stats().compactions, 10u);
  EXPECT_EQ(sorted(before.neighbors(0)), expected);
}

TEST(Concurrency, GarbageCollectionAlongsideReaders) {
  GraphStore g;
  LinearizationRecorder rec;
  rec.attach(g);
  for (VertexId v = 0; v < 200; ++v) g.insert_edge(v, (v * 7) % 200, 1.0f);
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> checked{0};
  std::vector<std::thread> pool;
  for (int k = 0; k < 2; ++k)
    pool.emplace_back([&, k] {
      std::mt19937_64 rng(k);
      while (!stop.load()) {
        const VertexId a = rng() % 200, b = rng() % 200;
        try {
          if (rng() % 20 == 0) g.delete_vertex(a);
          else if (rng() % 4 == 0) g.delete_edge(a, b);
          else g.insert_edge(a, b, static_cast<Weight>(1 + rng() % 9));
        } catch (const Error& e) {
          ASSERT_TRUE(e.code() == ErrorCode::not_found || e.code() == ErrorCode::already_deleted);
        }
      }
    });
  pool.emplace_back([&] {
    while (!stop.load()) g.collect_garbage();
  });
  pool.emplace_back([&] {
    std::mt19937_64 rng(9);
    while (!stop.load()) {
      Snapshot s = g.snapshot();
      const VertexId v = rng() % 200;
      std::vector<Neighbor> first;
      bool visible = true;
      try {
        first = sorted(s.neighbors(v));
      } catch (const Error& e) {
        ASSERT_EQ(e.code(), ErrorCode::not_visible);
        visible = false;
      }
      std::this_thread::yield();
      if (visible) {
        ASSERT_EQ(sorted(s.neighbors(v)), first);
      } else {
        ASSERT_FALSE(s.contains(v));
      }
      ++checked;
    }
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(800));
  stop = true;
  for (auto& t : pool) t.join();
  EXPECT_GT(checked.load(), 0u);
  g.collect_garbage();
  EXPECT_EQ(harness::memory_report(g, 1), harness::audited_memory_report(g, 1));
  EXPECT_EQ(harness::compare_snapshot(g.snapshot(), harness::replay(rec.sorted())), "");
}

TEST(Concurrency, BackgroundReoptimizationUnderWriters) {
  GraphOptions options;
  options.expected_vertices = 16;
  GraphStore g(options);
  const FanoutConfig initial = g.config();
  std::vector<std::vector<VertexId>> ids(4);
  std::vector<std::thread> pool;
  for (int k = 0; k < 4; ++k)
    pool.emplace_back([&, k] {
      std::mt19937_64 rng(k);
      for (VertexId i = 0; i < 15000; ++i) {
        const VertexId id = (static_cast<VertexId>(k) << 28) | (rng() & 0x0fffffffu);
        g.insert_vertex(id);
        ids[k].push_back(id);
        if (i % 3 == 0) {
          ASSERT_TRUE(g.has_vertex(id));
        }
      }
    });
  std::thread reader([&] {
    // Insert-only: each snapshot sees at least what the previous one saw.
    std::size_t last = 0;
    for (int i = 0; i < 200; ++i) {
      const Snapshot s = g.snapshot();
      const std::size_t n = s.vertices().size();
      ASSERT_GE(n, last);
      last = n;
    }
  });
  for (auto& t : pool) t.join();
  reader.join();
  g.wait_for_reoptimization();
  EXPECT_GT(g.reoptimizations(), 0u);
  EXPECT_NE(g.config(), initial);
  std::set<VertexId> distinct;
  for (const auto& list : ids) distinct.insert(list.begin(), list.end());
  EXPECT_EQ(g.vertex_count(), distinct.size());
  for (VertexId id : distinct) ASSERT_TRUE(g.has_vertex(id)) << id;
  EXPECT_EQ(harness::memory_report(g, 1), harness::audited_memory_report(g, 1));
}

TEST(Concurrency, SingleThreadedOracleTraces) {
  for (std::uint64_t seed : {1u, 2u}) {
    harness::TraceOptions t;
    t.ops = 20000;
    t.seed = seed;
    t.vertex_pool = 300;
    t.samples = 20;
    const harness::TraceReport r = harness::run_oracle_trace(t);
    for (const auto& m : r.mismatches) ADD_FAILURE() << "seed " << seed << ": " << m;
    EXPECT_EQ(r.samples_checked, 20u);
    EXPECT_GT(r.rejected, 0u);
  }
}

}  // namespace
}  // namespace sortgraph
