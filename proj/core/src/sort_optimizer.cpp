#include "sortgraph/sort_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sortgraph/error.hpp"

namespace sortgraph {

namespace {

using u128 = unsigned __int128;

constexpr std::uint64_t kDirectProductLimit = 1u << 16;
constexpr double kPruneMargin = 1e-12;

u128 pow2(unsigned e) { return static_cast<u128>(1) << e; }

void check_universe(unsigned bits, std::uint64_t count) {
  if (bits < 1 || bits > 64) raise(ErrorCode::invalid_argument, "identifier bit-length must be in [1, 64]");
  if (count < 1) raise(ErrorCode::invalid_argument, "vertex count must be at least 1");
  if (static_cast<u128>(count) > pow2(bits)) raise(ErrorCode::invalid_argument, "vertex count exceeds the identifier universe");
}

// 1 - ((U - S) / U)^n, a lower bound on node_probability.
double optimistic_probability(unsigned bits, std::uint64_t count, unsigned tail_bits) {
  if (tail_bits >= bits) return 1.0;
  const long double ratio = std::ldexp(1.0L, static_cast<int>(tail_bits) - static_cast<int>(bits));
  return static_cast<double>(-std::expm1(static_cast<long double>(count) * std::log1p(-ratio)));
}

}  // namespace

void UniverseSpec::validate() const {
  check_universe(bits, count);
  if (layers > bits) raise(ErrorCode::invalid_argument, "layer count must not exceed the identifier bit-length");
}

unsigned UniverseSpec::effective_layers() const {
  return layers != 0 ? layers : std::min(default_layers(bits), bits);
}

unsigned default_layers(unsigned bits) {
  unsigned l = 0;
  while ((1ull << l) < bits) ++l;
  return std::max(1u, l);
}

FanoutConfig::FanoutConfig(std::vector<unsigned> fanouts) : fanouts_(std::move(fanouts)) {
  if (fanouts_.empty()) raise(ErrorCode::invalid_argument, "fanout configuration must have at least one layer");
  prefix_.reserve(fanouts_.size());
  unsigned sum = 0;
  for (unsigned a : fanouts_) {
    if (a == 0) raise(ErrorCode::invalid_argument, "fanouts must be positive after pruning");
    sum += a;
    if (sum > 64) raise(ErrorCode::invalid_argument, "fanouts span more than 64 bits");
    prefix_.push_back(sum);
  }
}

FanoutConfig FanoutConfig::pruned(std::span<const unsigned> fanouts) {
  std::vector<unsigned> kept;
  for (unsigned a : fanouts)
    if (a != 0) kept.push_back(a);
  return FanoutConfig(std::move(kept));
}

FanoutConfig FanoutConfig::parse(std::string_view text) {
  std::vector<unsigned> values;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      values.push_back(static_cast<unsigned>(v));
    } catch (const std::exception&) {
      raise(ErrorCode::invalid_argument, "malformed fanout value '" + token + "'");
    }
    token.clear();
  };
  for (char c : text) {
    if (c == '{' || c == '}' || c == ' ' || c == '\t') continue;
    if (c == ',') {
      flush();
      continue;
    }
    token.push_back(c);
  }
  flush();
  return FanoutConfig(std::move(values));
}

std::string FanoutConfig::to_string() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < fanouts_.size(); ++i) out << (i ? "," : "") << fanouts_[i];
  out << '}';
  return out.str();
}

double node_probability(unsigned bits, std::uint64_t count, unsigned tail_bits) {
  check_universe(bits, count);
  if (tail_bits > bits) raise(ErrorCode::invalid_argument, "subtree width exceeds the identifier bit-length");

  const u128 universe = pow2(bits);
  const u128 interval = pow2(tail_bits);
  if (universe - interval < count) return 1.0;

  // C(U-S, n) / C(U, n) = prod_{i<m} (1 - b / (U - i)) with m = min(n, S),
  // b = max(n, S); the symmetric form keeps the product short.
  const long double u = std::ldexp(1.0L, static_cast<int>(bits));
  const long double s = std::ldexp(1.0L, static_cast<int>(tail_bits));
  const long double n = static_cast<long double>(count);
  const u128 short_side = std::min<u128>(interval, count);

  long double log_ratio = 0.0L;
  if (short_side <= kDirectProductLimit) {
    const long double b = std::max(s, n);
    const auto m = static_cast<std::uint64_t>(short_side);
    for (std::uint64_t i = 0; i < m; ++i) log_ratio += std::log1p(-b / (u - static_cast<long double>(i)));
  } else {
    log_ratio = std::lgamma(u - s + 1.0L) + std::lgamma(u - n + 1.0L) - std::lgamma(u + 1.0L) -
                std::lgamma(u - s - n + 1.0L);
  }
  const double p = static_cast<double>(-std::expm1(log_ratio));
  return std::clamp(p, 0.0, 1.0);
}

double expected_space(const FanoutConfig& config, const UniverseSpec& spec) {
  check_universe(spec.bits, spec.count);
  if (config.empty() || config.bits() != spec.bits)
    raise(ErrorCode::invalid_argument, "configuration " + config.to_string() + " does not span " +
                                           std::to_string(spec.bits) + " bits");
  const auto prefix = config.prefix_sums();
  double total = std::ldexp(1.0, static_cast<int>(prefix[0]));
  for (std::size_t i = 1; i < prefix.size(); ++i)
    total += std::ldexp(1.0, static_cast<int>(prefix[i])) * node_probability(spec.bits, spec.count, spec.bits - prefix[i - 1]);
  return total;
}

OptimizerResult optimize_detailed(const UniverseSpec& spec, const OptimizerOptions& options) {
  spec.validate();
  const unsigned x = spec.bits;
  const unsigned l = spec.effective_layers();
  const unsigned width = x + 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  OptimizerResult result;
  DpTable& table = result.table;
  table.bits = x;
  table.layers = l;
  table.values.assign(static_cast<std::size_t>(l) * width, kInf);
  table.back.assign(static_cast<std::size_t>(l) * width, 0);

  // Probabilities depend only on the predecessor prefix k; evaluate lazily so
  // that pruned transitions never pay for the factorial ratio.
  std::vector<double> probability(width, std::numeric_limits<double>::quiet_NaN());
  auto probability_at = [&](unsigned k) {
    double& p = probability[k];
    if (std::isnan(p)) {
      p = node_probability(x, spec.count, x - k);
      ++result.probability_evaluations;
    }
    return p;
  };

  for (unsigned j = 0; j <= x; ++j) table.values[j] = std::ldexp(1.0, static_cast<int>(j));

  for (unsigned i = 1; i < l; ++i) {
    const double* prev = &table.values[(i - 1) * width];
    for (unsigned j = 0; j <= x; ++j) {
      const double slots = std::ldexp(1.0, static_cast<int>(j));
      double best = kInf;
      unsigned arg = 0;
      for (unsigned k = 0; k <= j; ++k) {
        double candidate;
        if (k == j) {
          // A zero-width layer is pruned from the tree and owns no nodes.
          candidate = prev[k];
        } else {
          if (options.upper_bound_pruning && best < kInf) {
            const double optimistic = prev[k] + slots * optimistic_probability(x, spec.count, x - k);
            if (optimistic > best * (1.0 + kPruneMargin)) {
              ++result.pruned_transitions;
              continue;
            }
          }
          candidate = prev[k] + slots * probability_at(k);
        }
        if (candidate < best) {
          best = candidate;
          arg = k;
        }
      }
      table.values[i * width + j] = best;
      table.back[i * width + j] = arg;
    }
  }

  std::vector<unsigned> prefix(l);
  prefix[l - 1] = x;
  for (unsigned i = l - 1; i > 0; --i) prefix[i - 1] = table.predecessor(i, prefix[i]);
  std::vector<unsigned> fanouts(l);
  fanouts[0] = prefix[0];
  for (unsigned i = 1; i < l; ++i) fanouts[i] = prefix[i] - prefix[i - 1];

  result.config = FanoutConfig::pruned(fanouts);
  result.expected_slots = table.value(l - 1, x);
  return result;
}

FanoutConfig optimize(const UniverseSpec& spec, const OptimizerOptions& options) {
  return optimize_detailed(spec, options).config;
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "uniform") return BaselineKind::uniform;
  if (name == "veb") return BaselineKind::veb;
  raise(ErrorCode::invalid_argument, "unknown baseline kind '" + std::string(name) + "'");
}

FanoutConfig baseline_config(BaselineKind kind, unsigned bits, unsigned layers) {
  if (bits < 1 || bits > 64) raise(ErrorCode::invalid_argument, "identifier bit-length must be in [1, 64]");
  std::vector<unsigned> fanouts;
  switch (kind) {
    case BaselineKind::uniform: {
      if (layers < 1) raise(ErrorCode::invalid_argument, "uniform baseline needs at least one layer");
      const unsigned per_layer = (bits + layers - 1) / layers;
      unsigned remaining = bits;
      for (unsigned i = 0; i < layers; ++i) {
        const unsigned a = std::min(per_layer, remaining);
        fanouts.push_back(a);
        remaining -= a;
      }
      break;
    }
    case BaselineKind::veb: {
      unsigned remaining = bits;
      while (remaining > 1) {
        const unsigned a = (remaining + 1) / 2;
        fanouts.push_back(a);
        remaining -= a;
      }
      if (remaining == 1) fanouts.push_back(1);
      break;
    }
  }
  return FanoutConfig::pruned(fanouts);
}

}  // namespace sortgraph
