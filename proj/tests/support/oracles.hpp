#pragma once

// Independent reference computations shared by the unit and acceptance
// suites. None of these call into the code under test except for types.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sortgraph/sort_optimizer.hpp"
#include "sortgraph/types.hpp"

namespace sortgraph::testkit {

using Rational = boost::multiprecision::cpp_rational;

// 1 - prod_{i<n} (U - S - i) / (U - i), exactly.
inline Rational exact_node_probability(unsigned bits, std::uint64_t n, unsigned tail_bits) {
  using boost::multiprecision::cpp_int;
  const cpp_int u = cpp_int(1) << bits;
  const cpp_int s = cpp_int(1) << tail_bits;
  if (u - s < n) return Rational(1);
  cpp_int num = 1, den = 1;
  for (std::uint64_t i = 0; i < n; ++i) {
    num *= u - s - i;
    den *= u - i;
  }
  return Rational(1) - Rational(num, den);
}

// 2^{s_0} + sum_{i>=1} 2^{s_i} p(x - s_{i-1}), exactly.
inline Rational exact_expected_space(const std::vector<unsigned>& fanouts, unsigned bits, std::uint64_t n) {
  using boost::multiprecision::cpp_int;
  Rational total(cpp_int(1) << fanouts.at(0));
  unsigned prefix = fanouts[0];
  for (std::size_t i = 1; i < fanouts.size(); ++i) {
    const unsigned next = prefix + fanouts[i];
    total += Rational(cpp_int(1) << next) * exact_node_probability(bits, n, bits - prefix);
    prefix = next;
  }
  return total;
}

// Every composition of `bits` into `layers` non-negative parts.
inline void for_each_composition(unsigned bits, unsigned layers,
                                 const std::function<void(const std::vector<unsigned>&)>& visit) {
  std::vector<unsigned> parts(layers, 0);
  std::function<void(unsigned, unsigned)> rec = [&](unsigned layer, unsigned left) {
    if (layer + 1 == layers) {
      parts[layer] = left;
      visit(parts);
      return;
    }
    for (unsigned a = 0; a <= left; ++a) {
      parts[layer] = a;
      rec(layer + 1, left - a);
    }
  };
  rec(0, bits);
}

inline std::vector<unsigned> drop_zeros(const std::vector<unsigned>& parts) {
  std::vector<unsigned> out;
  for (unsigned a : parts)
    if (a != 0) out.push_back(a);
  return out;
}

// Slot count of the tree that holds exactly `ids`: a layer-i node exists for
// every distinct s_{i-1}-bit prefix.
inline std::uint64_t instantiated_slots(const std::vector<unsigned>& fanouts, unsigned bits,
                                        const std::vector<std::uint64_t>& ids) {
  std::uint64_t total = std::uint64_t{1} << fanouts.at(0);
  unsigned prefix = fanouts[0];
  for (std::size_t i = 1; i < fanouts.size(); ++i) {
    std::set<std::uint64_t> nodes;
    for (std::uint64_t id : ids) nodes.insert(id >> (bits - prefix));
    total += nodes.size() * (std::uint64_t{1} << fanouts[i]);
    prefix += fanouts[i];
  }
  return total;
}

// Per-destination write history of one vertex's out-edges.
class VersionedEdgeMap {
 public:
  void write(std::uint64_t dst, Timestamp t, Weight w) { history_[dst][t] = w; }

  // Latest non-tombstone write per destination at or before t.
  std::map<std::uint64_t, Weight> at(Timestamp t) const {
    std::map<std::uint64_t, Weight> out;
    for (const auto& [dst, writes] : history_) {
      auto it = writes.upper_bound(t);
      if (it == writes.begin()) continue;
      --it;
      if (it->second != kTombstone) out[dst] = it->second;
    }
    return out;
  }

 private:
  std::map<std::uint64_t, std::map<Timestamp, Weight>> history_;
};

// Least-squares fit y = a + b x; returns R^2.
inline double linear_r2(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double cov = sxy - sx * sy / n, vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  return vy == 0 ? 1.0 : cov * cov / (vx * vy);
}

}  // namespace sortgraph::testkit
