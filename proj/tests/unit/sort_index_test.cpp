#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <random>
#include <thread>
#include <unordered_map>
#include <vector>

#include "sortgraph/error.hpp"
#include "sortgraph/sort_index.hpp"

namespace sortgraph {
namespace {

std::vector<VertexId> distinct_ids(std::size_t n, unsigned bits, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::uint64_t mask = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
  std::unordered_map<VertexId, bool> seen;
  std::vector<VertexId> out;
  while (out.size() < n) {
    const VertexId id = rng() & mask;
    if (seen.emplace(id, true).second) out.push_back(id);
  }
  return out;
}

std::map<VertexId, Offset> contents(const SortIndex& index) {
  std::map<VertexId, Offset> out;
  index.for_each([&](VertexId id, Offset o) { out.emplace(id, o); });
  return out;
}

TEST(SortIndex, EmptyTreeFindsNothing) {
  SortIndex index(FanoutConfig({3, 2, 1}));
  EXPECT_FALSE(index.lookup(0).has_value());
  EXPECT_FALSE(index.lookup(63).has_value());
  EXPECT_EQ(index.slot_count(), 8u);
  EXPECT_EQ(index.node_count(), 1u);
}

TEST(SortIndex, FigureThreeLookup) {
  SortIndex index(FanoutConfig({3, 2, 1}));
  const auto r = index.insert(52, 96);
  EXPECT_TRUE(r.inserted);
  EXPECT_EQ(r.offset, 96u);
  EXPECT_EQ(index.lookup(52), std::optional<Offset>(96));
  // 110100: root slot 110, then 10, then leaf slot 0. The neighbouring leaf
  // slot 110101 = 53 shares the whole path.
  EXPECT_FALSE(index.lookup(53).has_value());
  EXPECT_EQ(index.node_count(), 3u);
  EXPECT_EQ(index.slot_count(), 8u + 4u + 2u);
  index.insert(53, 128);
  EXPECT_EQ(index.node_count(), 3u);
  index.insert(48, 160);  // 110000 reuses the layer-1 node, new leaf node
  EXPECT_EQ(index.node_count(), 4u);
  EXPECT_EQ(index.recount_slots(), index.slot_count());
}

TEST(SortIndex, DuplicateInsertReportsExistingOffset) {
  SortIndex index(FanoutConfig({4, 4}));
  EXPECT_TRUE(index.insert(7, 32).inserted);
  const auto again = index.insert(7, 64);
  EXPECT_FALSE(again.inserted);
  EXPECT_EQ(again.offset, 32u);
  EXPECT_EQ(index.lookup(7), std::optional<Offset>(32));
}

TEST(SortIndex, OffsetZeroIsAValidBinding) {
  SortIndex index(FanoutConfig({2, 2}));
  EXPECT_TRUE(index.insert(5, 0).inserted);
  EXPECT_EQ(index.lookup(5), std::optional<Offset>(0));
  EXPECT_TRUE(index.remove(5));
  EXPECT_FALSE(index.lookup(5).has_value());
}

TEST(SortIndex, RejectsIdsOutsideTheDomain) {
  SortIndex index(FanoutConfig({3, 2, 1}));
  try {
    index.insert(64, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::capacity);
  }
  EXPECT_FALSE(index.lookup(1000).has_value());
}

TEST(SortIndex, RandomInsertsRoundTripAndRecount) {
  const FanoutConfig config = optimize({32, 10000, 5});
  SortIndex index(config);
  const auto ids = distinct_ids(10000, 32, 11);
  for (std::size_t i = 0; i < ids.size(); ++i) ASSERT_TRUE(index.insert(ids[i], i * 32).inserted);
  for (std::size_t i = 0; i < ids.size(); ++i) ASSERT_EQ(index.lookup(ids[i]), std::optional<Offset>(i * 32));
  EXPECT_EQ(index.recount_slots(), index.slot_count());
  EXPECT_EQ(index.bytes(), index.slot_count() * 8);
}

TEST(SortIndex, LookupAgreesWithMapOracle) {
  SortIndex index(optimize({32, 100000, 5}));
  const auto ids = distinct_ids(200000, 32, 12);
  std::unordered_map<VertexId, Offset> oracle;
  for (std::size_t i = 0; i < 100000; ++i) {
    index.insert(ids[i], i * 32);
    oracle.emplace(ids[i], i * 32);
  }
  for (VertexId id : ids) {
    const auto got = index.lookup(id);
    const auto it = oracle.find(id);
    if (it == oracle.end())
      ASSERT_FALSE(got.has_value()) << id;
    else
      ASSERT_EQ(got, std::optional<Offset>(it->second)) << id;
  }
}

TEST(SortIndex, RemoveClearsOnlyTheLeaf) {
  SortIndex index(FanoutConfig({3, 2, 1}));
  EXPECT_FALSE(index.remove(52));
  index.insert(52, 96);
  const auto slots = index.slot_count();
  EXPECT_TRUE(index.remove(52));
  EXPECT_FALSE(index.lookup(52).has_value());
  EXPECT_FALSE(index.remove(52));
  EXPECT_EQ(index.slot_count(), slots);
}

TEST(SortIndex, ConditionalRemoveAndReplace) {
  SortIndex index(FanoutConfig({4, 4}));
  index.insert(9, 64);
  EXPECT_FALSE(index.remove_if(9, 32));
  EXPECT_FALSE(index.replace(9, 32, 96));
  EXPECT_TRUE(index.replace(9, 64, 96));
  EXPECT_EQ(index.lookup(9), std::optional<Offset>(96));
  EXPECT_TRUE(index.remove_if(9, 96));
  EXPECT_FALSE(index.lookup(9).has_value());
}

TEST(SortIndex, InterleavedTraceMatchesMapOracle) {
  SortIndex index(FanoutConfig({4, 3, 3}));
  std::map<VertexId, Offset> oracle;
  std::mt19937_64 rng(13);
  for (int step = 0; step < 10000; ++step) {
    const VertexId id = rng() % 1024;
    if (rng() % 3 == 0) {
      ASSERT_EQ(index.remove(id), oracle.erase(id) == 1);
    } else {
      const Offset o = (rng() % 5000) * 32;
      const auto r = index.insert(id, o);
      const auto [it, fresh] = oracle.emplace(id, o);
      ASSERT_EQ(r.inserted, fresh);
      ASSERT_EQ(r.offset, it->second);
    }
  }
  EXPECT_EQ(contents(index), oracle);
  EXPECT_EQ(index.recount_slots(), index.slot_count());
}

TEST(SortIndex, ForEachVisitsInIdOrder) {
  SortIndex index(FanoutConfig({2, 3, 3}));
  for (VertexId id : {200u, 3u, 77u, 255u, 0u}) index.insert(id, id * 32);
  std::vector<VertexId> seen;
  index.for_each([&](VertexId id, Offset o) {
    EXPECT_EQ(o, id * 32);
    seen.push_back(id);
  });
  EXPECT_EQ(seen, (std::vector<VertexId>{0, 3, 77, 200, 255}));
}

TEST(SortIndexAdapt, IdenticalConfigReusesEverything) {
  SortIndex index(FanoutConfig({3, 2, 1}));
  for (VertexId id = 0; id < 64; id += 5) index.insert(id, id * 32);
  const auto before = contents(index);
  const auto slots = index.slot_count();
  SortIndex::AdaptStats stats;
  RetiredNodes retired = index.adapt(FanoutConfig({3, 2, 1}), &stats);
  EXPECT_EQ(stats.reused_layers, 3u);
  EXPECT_EQ(stats.rebuilt_nodes, 0u);
  EXPECT_EQ(retired.node_count(), 0u);
  EXPECT_EQ(index.slot_count(), slots);
  EXPECT_EQ(contents(index), before);
}

TEST(SortIndexAdapt, PublishedConfigPairKeepsEveryBinding) {
  SortIndex index(FanoutConfig({19, 4, 3, 3, 3}));
  const auto ids = distinct_ids(50000, 32, 14);
  for (std::size_t i = 0; i < ids.size(); ++i) index.insert(ids[i], i * 32);
  const auto before = contents(index);
  SortIndex::AdaptStats stats;
  index.adapt(FanoutConfig({20, 3, 3, 3, 3}), &stats);
  EXPECT_EQ(index.config(), FanoutConfig({20, 3, 3, 3, 3}));
  // Common suffix {3,3,3}: the bottom three layers move as whole subtrees.
  EXPECT_EQ(stats.reused_layers, 3u);
  EXPECT_GT(stats.reused_subtrees, 0u);
  EXPECT_EQ(contents(index), before);
  EXPECT_EQ(index.recount_slots(), index.slot_count());
  for (std::size_t i = 0; i < ids.size(); ++i) ASSERT_EQ(index.lookup(ids[i]), std::optional<Offset>(i * 32));
}

TEST(SortIndexAdapt, NoSharedSuffixRebuilds) {
  SortIndex index(FanoutConfig({4, 4}));
  for (VertexId id = 0; id < 256; id += 3) index.insert(id, id * 32);
  const auto before = contents(index);
  SortIndex::AdaptStats stats;
  index.adapt(FanoutConfig({5, 3}), &stats);
  EXPECT_EQ(stats.reused_layers, 0u);
  EXPECT_EQ(contents(index), before);
  EXPECT_EQ(index.recount_slots(), index.slot_count());
}

TEST(SortIndexAdapt, MillionKeysSurvive) {
  SortIndex index(optimize({32, 1000, 5}));
  const auto ids = distinct_ids(1000000, 32, 15);
  for (std::size_t i = 0; i < ids.size(); ++i) index.insert(ids[i], i * 32);
  index.adapt(optimize({32, 1000000, 5}));
  for (std::size_t i = 0; i < ids.size(); ++i) ASSERT_EQ(index.lookup(ids[i]), std::optional<Offset>(i * 32));
  EXPECT_EQ(index.recount_slots(), index.slot_count());
}

TEST(SortIndexAdapt, RejectsSpanMismatch) {
  SortIndex index(FanoutConfig({3, 2, 1}));
  try {
    index.adapt(FanoutConfig({3, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(SortIndexConcurrency, DistinctInsertsAreAllFound) {
  SortIndex index(FanoutConfig({8, 8, 8, 8}));
  const auto ids = distinct_ids(80000, 32, 16);
  constexpr unsigned kThreads = 8;
  std::vector<std::thread> workers;
  for (unsigned t = 0; t < kThreads; ++t)
    workers.emplace_back([&, t] {
      for (std::size_t i = t; i < ids.size(); i += kThreads) index.insert(ids[i], i * 32);
    });
  for (auto& w : workers) w.join();
  for (std::size_t i = 0; i < ids.size(); ++i) ASSERT_EQ(index.lookup(ids[i]), std::optional<Offset>(i * 32));
  EXPECT_EQ(index.recount_slots(), index.slot_count());
}

TEST(SortIndexConcurrency, DuplicateInsertHasOneWinner) {
  for (int round = 0; round < 50; ++round) {
    SortIndex index(FanoutConfig({8, 8, 8, 8}));
    constexpr unsigned kThreads = 6;
    std::atomic<unsigned> winners{0};
    std::vector<Offset> seen(kThreads);
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < kThreads; ++t)
      workers.emplace_back([&, t] {
        const auto r = index.insert(0xDEADBEEF, (t + 1) * 32);
        if (r.inserted) winners.fetch_add(1);
        seen[t] = r.offset;
      });
    for (auto& w : workers) w.join();
    ASSERT_EQ(winners.load(), 1u);
    ASSERT_TRUE(std::all_of(seen.begin(), seen.end(), [&](Offset o) { return o == seen[0]; }));
    ASSERT_EQ(index.lookup(0xDEADBEEF), std::optional<Offset>(seen[0]));
  }
}

TEST(SortIndexConcurrency, ReadersDuringAdaptSeeEveryKey) {
  SortIndex index(FanoutConfig({16, 8, 8}));
  const auto ids = distinct_ids(20000, 32, 17);
  for (std::size_t i = 0; i < ids.size(); ++i) index.insert(ids[i], i * 32);
  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> misses{0};
  std::thread reader([&] {
    std::size_t i = 0;
    while (!stop.load()) {
      if (index.lookup(ids[i]) != std::optional<Offset>(i * 32)) misses.fetch_add(1);
      i = (i + 1) % ids.size();
    }
  });
  std::vector<RetiredNodes> keep;
  for (int k = 0; k < 10; ++k) {
    keep.push_back(index.adapt(FanoutConfig({12, 12, 8})));
    keep.push_back(index.adapt(FanoutConfig({16, 8, 8})));
  }
  stop = true;
  reader.join();
  EXPECT_EQ(misses.load(), 0u);
}

}  // namespace
}  // namespace sortgraph
