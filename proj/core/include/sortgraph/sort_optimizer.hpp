#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sortgraph {

// Identifier universe of a radix tree: `bits`-bit ids, `count` distinct ids
// expected, `layers` upper bound on tree depth.
struct UniverseSpec {
  unsigned bits = 32;
  std::uint64_t count = 1;
  unsigned layers = 0;  // 0 selects default_layers(bits)

  void validate() const;
  unsigned effective_layers() const;
};

// ceil(lg(bits)), never below 1. For 32-bit ids this is 5.
unsigned default_layers(unsigned bits);

// Per-layer logarithmic fanouts. Layer i nodes hold 2^fanout(i) child slots.
// Zero-width layers are never stored.
class FanoutConfig {
 public:
  FanoutConfig() = default;
  explicit FanoutConfig(std::vector<unsigned> fanouts);

  // Drops zero entries before validating.
  static FanoutConfig pruned(std::span<const unsigned> fanouts);
  // Parses "{19,4,3,3,3}" or "19,4,3,3,3".
  static FanoutConfig parse(std::string_view text);

  std::span<const unsigned> fanouts() const noexcept { return fanouts_; }
  std::span<const unsigned> prefix_sums() const noexcept { return prefix_; }
  unsigned fanout(std::size_t layer) const { return fanouts_.at(layer); }
  unsigned layers() const noexcept { return static_cast<unsigned>(fanouts_.size()); }
  unsigned bits() const noexcept { return prefix_.empty() ? 0 : prefix_.back(); }
  bool empty() const noexcept { return fanouts_.empty(); }

  std::string to_string() const;

  friend bool operator==(const FanoutConfig& a, const FanoutConfig& b) { return a.fanouts_ == b.fanouts_; }

 private:
  std::vector<unsigned> fanouts_;
  std::vector<unsigned> prefix_;
};

// Probability that a node whose subtree covers 2^tail_bits ids is
// instantiated when `count` distinct ids are drawn uniformly from 2^bits:
// 1 - C(2^bits - 2^tail_bits, count) / C(2^bits, count).
double node_probability(unsigned bits, std::uint64_t count, unsigned tail_bits);

// Expected number of child slots over all instantiated nodes.
double expected_space(const FanoutConfig& config, const UniverseSpec& spec);

inline double slots_to_bytes(double slots, double slot_width = 8.0) { return slots * slot_width; }

struct OptimizerOptions {
  // Skip transitions whose optimistic cost already loses to the incumbent.
  bool upper_bound_pruning = true;
};

// Dynamic-programming table. value(i, j) is the minimal expected slot count
// of the first i+1 layers when they consume exactly j bits.
struct DpTable {
  unsigned bits = 0;
  unsigned layers = 0;
  std::vector<double> values;
  std::vector<unsigned> back;  // predecessor prefix sum

  double value(unsigned layer, unsigned prefix) const { return values[layer * (bits + 1) + prefix]; }
  unsigned predecessor(unsigned layer, unsigned prefix) const { return back[layer * (bits + 1) + prefix]; }
};

struct OptimizerResult {
  FanoutConfig config;
  double expected_slots = 0.0;
  // Number of distinct node probabilities that had to be evaluated.
  std::size_t probability_evaluations = 0;
  std::size_t pruned_transitions = 0;
  DpTable table;
};

OptimizerResult optimize_detailed(const UniverseSpec& spec, const OptimizerOptions& options = {});
FanoutConfig optimize(const UniverseSpec& spec, const OptimizerOptions& options = {});

enum class BaselineKind { uniform, veb };

BaselineKind parse_baseline_kind(std::string_view name);
FanoutConfig baseline_config(BaselineKind kind, unsigned bits, unsigned layers);

}  // namespace sortgraph
