#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "sortgraph/error.hpp"
#include "sortgraph/sort_optimizer.hpp"

namespace sortgraph {
namespace {

using testkit::exact_expected_space;
using testkit::exact_node_probability;
using testkit::Rational;

std::vector<unsigned> fanouts(const FanoutConfig& c) { return {c.fanouts().begin(), c.fanouts().end()}; }

TEST(NodeProbability, SaturatesWhenTheComplementIsSmallerThanN) {
  EXPECT_EQ(node_probability(4, 16, 1), 1.0);
}

TEST(NodeProbability, FullWidthSubtreeIsAlwaysPresent) {
  for (unsigned x : {1u, 8u, 32u, 64u})
    for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{2}})
      EXPECT_EQ(node_probability(x, n, x), 1.0) << x << " " << n;
}

TEST(NodeProbability, MatchesExactRationalProduct) {
  EXPECT_NEAR(node_probability(8, 4, 6), exact_node_probability(8, 4, 6).convert_to<double>(), 1e-15);
  for (unsigned x = 1; x <= 16; ++x)
    for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{3}, std::min<std::uint64_t>(std::uint64_t{1} << (x - 1), 2048),
                            std::uint64_t{1} << x})
      for (unsigned s = 0; s <= x && n <= (std::uint64_t{1} << x); ++s) {
        const double want = exact_node_probability(x, n, s).convert_to<double>();
        EXPECT_NEAR(node_probability(x, n, s), want, 1e-12 * std::max(1.0, want)) << x << " " << n << " " << s;
      }
}

TEST(NodeProbability, TinyProbabilitiesKeepRelativePrecision) {
  // x = 32 with a single-id subtree: p = n / 2^32 exactly.
  EXPECT_NEAR(node_probability(32, 1000, 0), 1000.0 / 4294967296.0, 1e-18);
  const double want = exact_node_probability(32, 50, 3).convert_to<double>();
  EXPECT_NEAR(node_probability(32, 50, 3) / want, 1.0, 1e-9);
}

TEST(NodeProbability, NonDecreasingInTailAndCount) {
  for (unsigned x : {6u, 12u, 32u}) {
    const std::uint64_t top = x >= 63 ? 1000000 : std::min<std::uint64_t>(std::uint64_t{1} << x, 1000000);
    for (std::uint64_t n = 1; n <= top; n = n * 3 + 1) {
      double last = -1.0;
      for (unsigned s = 0; s <= x; ++s) {
        const double p = node_probability(x, n, s);
        EXPECT_GE(p, last - 1e-15);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
        last = p;
      }
    }
    for (unsigned s = 0; s <= x; ++s) {
      double last = -1.0;
      for (std::uint64_t n = 1; n <= top; n = n * 3 + 1) {
        const double p = node_probability(x, n, s);
        EXPECT_GE(p, last - 1e-15);
        last = p;
      }
    }
  }
}

TEST(NodeProbability, RejectsBadArguments) {
  EXPECT_THROW(node_probability(8, 4, 9), Error);
  EXPECT_THROW(node_probability(8, 257, 2), Error);
  EXPECT_THROW(node_probability(8, 0, 2), Error);
}

TEST(ExpectedSpace, SingleLayerIsTheWholeDomain) {
  for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{100}, std::uint64_t{4096}})
    EXPECT_EQ(expected_space(FanoutConfig({12}), UniverseSpec{12, n, 3}), 4096.0);
}

TEST(ExpectedSpace, MatchesExactRationalEvaluation) {
  const std::vector<std::vector<unsigned>> configs = {{2, 3, 3}, {4, 4}, {1, 1, 6}, {5, 2, 1}};
  for (const auto& c : configs)
    for (std::uint64_t n : {1, 2, 16, 100, 256}) {
      const double want = exact_expected_space(c, 8, n).convert_to<double>();
      EXPECT_NEAR(expected_space(FanoutConfig(c), UniverseSpec{8, n, 3}), want, 1e-9 * want);
    }
}

TEST(ExpectedSpace, MonteCarloAverageWithinTwoPercent) {
  const std::vector<unsigned> config = {2, 3, 3};
  std::mt19937_64 rng(2024);
  double sum = 0.0;
  const int samples = 2000;
  for (int s = 0; s < samples; ++s) {
    std::vector<std::uint64_t> all(256);
    for (std::uint64_t i = 0; i < 256; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(16);
    sum += static_cast<double>(testkit::instantiated_slots(config, 8, all));
  }
  const double predicted = expected_space(FanoutConfig(config), UniverseSpec{8, 16, 3});
  EXPECT_NEAR(sum / samples, predicted, 0.02 * predicted);
}

TEST(ExpectedSpace, RejectsMismatchedSpan) {
  EXPECT_THROW(expected_space(FanoutConfig({3, 3}), UniverseSpec{8, 4, 3}), Error);
}

TEST(Optimize, PublishedConfigurations) {
  EXPECT_EQ(fanouts(optimize({32, 50000, 5})), (std::vector<unsigned>{19, 4, 3, 3, 3}));
  EXPECT_EQ(fanouts(optimize({32, 300000, 5})), (std::vector<unsigned>{20, 3, 3, 3, 3}));
}

TEST(Optimize, DefaultLayerBudgetIsCeilLgBits) {
  EXPECT_EQ(default_layers(32), 5u);
  EXPECT_EQ(default_layers(64), 6u);
  EXPECT_EQ(default_layers(1), 1u);
  EXPECT_EQ(fanouts(optimize({32, 50000, 0})), (std::vector<unsigned>{19, 4, 3, 3, 3}));
}

TEST(Optimize, SmallCaseMatchesExhaustiveEnumeration) {
  Rational best(-1);
  std::vector<unsigned> arg;
  testkit::for_each_composition(8, 3, [&](const std::vector<unsigned>& parts) {
    const auto c = testkit::drop_zeros(parts);
    const Rational v = exact_expected_space(c, 8, 16);
    if (best < 0 || v < best) {
      best = v;
      arg = c;
    }
  });
  const FanoutConfig got = optimize({8, 16, 3});
  EXPECT_EQ(exact_expected_space(fanouts(got), 8, 16), best);
  EXPECT_EQ(fanouts(got), (std::vector<unsigned>{5, 2, 1}));
}

TEST(Optimize, MatchesExhaustiveMinimumOnGrid) {
  for (unsigned x = 1; x <= 10; ++x)
    for (unsigned l = 1; l <= std::min(4u, x); ++l)
      for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{1} << (x - 1), std::uint64_t{1} << x}) {
        Rational best(-1);
        testkit::for_each_composition(x, l, [&](const std::vector<unsigned>& parts) {
          const Rational v = exact_expected_space(testkit::drop_zeros(parts), x, n);
          if (best < 0 || v < best) best = v;
        });
        const FanoutConfig got = optimize({x, n, l});
        const Rational v = exact_expected_space(fanouts(got), x, n);
        EXPECT_LE(boost::multiprecision::abs(v - best) / best, Rational(1, 1000000000))
            << "x=" << x << " l=" << l << " n=" << n << " got " << got.to_string();
      }
}

TEST(Optimize, SpansTheDomainAndHasPositiveFanouts) {
  for (unsigned x : {5u, 16u, 32u, 48u})
    for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{1000}, std::uint64_t{1} << (x / 2)}) {
      if (n > (std::uint64_t{1} << x)) continue;
      const FanoutConfig c = optimize({x, n, 0});
      EXPECT_EQ(c.bits(), x);
      for (unsigned a : c.fanouts()) EXPECT_GE(a, 1u);
      const auto p = c.prefix_sums();
      for (std::size_t i = 1; i < p.size(); ++i) EXPECT_LT(p[i - 1], p[i]);
    }
}

TEST(Optimize, FullUniverseCollapsesToOneLayer) {
  for (unsigned x = 1; x <= 16; ++x)
    EXPECT_EQ(fanouts(optimize({x, std::uint64_t{1} << x, std::min(4u, x)})), std::vector<unsigned>{x}) << x;
}

TEST(Optimize, PruningNeverChangesTheResult) {
  OptimizerOptions off;
  off.upper_bound_pruning = false;
  for (unsigned x = 1; x <= 12; ++x)
    for (unsigned l = 1; l <= std::min(4u, x); ++l)
      for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{1} << (x - 1), std::uint64_t{1} << x})
        EXPECT_EQ(optimize({x, n, l}), optimize({x, n, l}, off)) << x << " " << l << " " << n;
  for (std::uint64_t n : {1000, 50000, 300000, 10000000})
    EXPECT_EQ(optimize({32, static_cast<std::uint64_t>(n), 5}), optimize({32, static_cast<std::uint64_t>(n), 5}, off));
}

TEST(Optimize, TableInvariants) {
  OptimizerOptions off;
  off.upper_bound_pruning = false;
  const OptimizerResult r = optimize_detailed({10, 37, 4}, off);
  for (unsigned j = 0; j <= 10; ++j) EXPECT_EQ(r.table.value(0, j), std::ldexp(1.0, static_cast<int>(j)));
  for (unsigned i = 1; i < 4; ++i)
    for (unsigned j = 0; j <= 10; ++j) EXPECT_LE(r.table.value(i, j), r.table.value(i - 1, j) * (1 + 1e-12));
  EXPECT_NEAR(r.expected_slots, expected_space(r.config, {10, 37, 4}), 1e-9 * r.expected_slots);
}

TEST(Optimize, LargeInputsAreFast) {
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(fanouts(optimize({32, 10000000, 5})), (std::vector<unsigned>{24, 2, 2, 2, 2}));
  optimize({64, 1000000000, 0});
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 5.0);
}

TEST(Optimize, RejectsInvalidUniverse) {
  EXPECT_THROW(optimize({8, 257, 3}), Error);
  EXPECT_THROW(optimize({8, 4, 9}), Error);
  EXPECT_THROW(optimize({0, 1, 1}), Error);
}

TEST(Baseline, UniformSplitsEvenly) {
  EXPECT_EQ(fanouts(baseline_config(BaselineKind::uniform, 32, 5)), (std::vector<unsigned>{7, 7, 7, 7, 4}));
  EXPECT_EQ(fanouts(baseline_config(BaselineKind::uniform, 8, 4)), (std::vector<unsigned>{2, 2, 2, 2}));
}

TEST(Baseline, VebHalvesRepeatedly) {
  EXPECT_EQ(fanouts(baseline_config(BaselineKind::veb, 32, 5)), (std::vector<unsigned>{16, 8, 4, 2, 1, 1}));
  EXPECT_EQ(fanouts(baseline_config(BaselineKind::veb, 4, 3)), (std::vector<unsigned>{2, 1, 1}));
  EXPECT_EQ(fanouts(baseline_config(BaselineKind::veb, 1, 1)), (std::vector<unsigned>{1}));
}

TEST(Baseline, UnknownKindIsRejected) {
  EXPECT_EQ(parse_baseline_kind("veb"), BaselineKind::veb);
  EXPECT_THROW(parse_baseline_kind("btree"), Error);
}

TEST(FanoutConfig, ParsesAndPrints) {
  const FanoutConfig c = FanoutConfig::parse("{19,4,3,3,3}");
  EXPECT_EQ(c.to_string(), "{19,4,3,3,3}");
  EXPECT_EQ(c.bits(), 32u);
  EXPECT_EQ(FanoutConfig::parse("3, 2,1"), FanoutConfig({3, 2, 1}));
  EXPECT_THROW(FanoutConfig::parse("{3,x}"), Error);
  EXPECT_THROW(FanoutConfig({3, 0, 1}), Error);
  const std::vector<unsigned> raw = {3, 0, 2, 0};
  EXPECT_EQ(FanoutConfig::pruned(raw), FanoutConfig({3, 2}));
}

}  // namespace
}  // namespace sortgraph
