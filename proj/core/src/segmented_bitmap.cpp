#include "sortgraph/segmented_bitmap.hpp"

#include <algorithm>

#include "sortgraph/error.hpp"

namespace sortgraph {

SegmentedBitmap::SegmentedBitmap(std::size_t segment_bits)
    : segment_bits_(segment_bits), words_per_segment_((segment_bits + 63) / 64) {
  if (segment_bits == 0) raise(ErrorCode::invalid_argument, "segment length must be positive");
}

SegmentedBitmap::Position SegmentedBitmap::locate(Offset offset) const {
  if (offset % kVertexBlockBytes != 0)
    raise(ErrorCode::invalid_argument, "offset " + std::to_string(offset) + " is not a vertex block boundary");
  const std::uint64_t logical = logical_id(offset);
  return {static_cast<std::size_t>(logical / segment_bits_), static_cast<std::size_t>(logical % segment_bits_)};
}

void SegmentedBitmap::reserve_vertices(std::uint64_t logical_count) {
  const std::uint64_t needed = (logical_count + segment_bits_ - 1) / segment_bits_;
  while (segments_.size() < needed) segments_.push_back(std::make_unique<std::uint64_t[]>(words_per_segment_));
}

std::uint64_t& SegmentedBitmap::word(Offset offset, std::uint64_t& mask) const {
  const Position pos = locate(offset);
  if (pos.segment >= segments_.size())
    raise(ErrorCode::out_of_range, "bitmap segment " + std::to_string(pos.segment) + " not allocated");
  mask = std::uint64_t{1} << (pos.bit % 64);
  return segments_[pos.segment][pos.bit / 64];
}

bool SegmentedBitmap::test(Offset offset) const {
  std::uint64_t mask;
  return (word(offset, mask) & mask) != 0;
}

void SegmentedBitmap::mark(Offset offset) {
  std::uint64_t mask;
  word(offset, mask) |= mask;
}

void SegmentedBitmap::clear(Offset offset) {
  std::uint64_t mask;
  word(offset, mask) &= ~mask;
}

bool SegmentedBitmap::test_and_mark(Offset offset) {
  std::uint64_t mask;
  std::uint64_t& w = word(offset, mask);
  const bool was = (w & mask) != 0;
  w |= mask;
  return was;
}

bool SegmentedBitmap::all_zero() const {
  for (const auto& seg : segments_)
    if (std::any_of(seg.get(), seg.get() + words_per_segment_, [](std::uint64_t w) { return w != 0; })) return false;
  return true;
}

void SegmentedBitmap::reset() {
  for (auto& seg : segments_) std::fill(seg.get(), seg.get() + words_per_segment_, 0);
}

}  // namespace sortgraph
