#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "sortgraph/types.hpp"

namespace sortgraph {

// Duplicate checker: one bit per vertex slot, stored as fixed-length
// segments so the bitmap can grow without moving existing bits. The bit of
// the vertex at byte offset O is B[(O/32)/L][(O/32) mod L].
class SegmentedBitmap {
 public:
  static constexpr std::size_t kDefaultSegmentBits = 4096;

  explicit SegmentedBitmap(std::size_t segment_bits = kDefaultSegmentBits);

  struct Position {
    std::size_t segment;
    std::size_t bit;

    friend bool operator==(const Position&, const Position&) = default;
  };

  std::size_t segment_bits() const noexcept { return segment_bits_; }
  std::size_t segment_count() const noexcept { return segments_.size(); }
  // Bits addressable without growing.
  std::uint64_t capacity_bits() const noexcept { return static_cast<std::uint64_t>(segments_.size()) * segment_bits_; }
  // Accounted footprint: L bits per segment.
  std::uint64_t bytes() const noexcept { return capacity_bits() / 8; }

  Position locate(Offset offset) const;

  // Adds segments until `logical_count` vertices are addressable.
  void reserve_vertices(std::uint64_t logical_count);

  bool test(Offset offset) const;
  void mark(Offset offset);
  void clear(Offset offset);
  // Marks and returns the previous state.
  bool test_and_mark(Offset offset);

  // Full scan; used by audits.
  bool all_zero() const;
  // Clears every bit with a full scan.
  void reset();

 private:
  std::uint64_t& word(Offset offset, std::uint64_t& mask) const;

  std::size_t segment_bits_;
  std::size_t words_per_segment_;
  std::vector<std::unique_ptr<std::uint64_t[]>> segments_;
};

}  // namespace sortgraph
