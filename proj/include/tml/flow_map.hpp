#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tml/error.hpp"
#include "tml/geometry.hpp"

namespace tml {

enum class ChannelLayout : std::uint8_t { Individual = 0, Accumulated = 1 };

/// Rasterized flow map: one (x, y) plane pair per channel, stored channel-major
/// as plane 2c = x components and plane 2c+1 = y components, each row-major.
///
/// `source_channels` is the number of limb (or, for joint-flow maps, joint)
/// channels the map was built over. Individual grids hold that many channels,
/// accumulated grids hold exactly one.
///
/// Cell (cx, cy) covers pixels [cx*s, cx*s + s) with its center at
/// (cx*s + (s-1)/2, ...), so with s = 1 cell centers sit on integer pixel
/// coordinates.
class FlowMapGrid {
 public:
  FlowMapGrid() = default;

  FlowMapGrid(std::size_t width, std::size_t height, ChannelLayout layout,
              std::size_t source_channels, std::size_t cell_size = 1)
      : width_(width),
        height_(height),
        layout_(layout),
        source_channels_(source_channels),
        cell_size_(cell_size) {
    if (cell_size_ == 0) fail_validation("flow map cell size must be >= 1");
    data_.assign(2 * channel_count() * width_ * height_, 0.0);
    counts_.assign(channel_count() * width_ * height_, 0);
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  ChannelLayout layout() const { return layout_; }
  std::size_t source_channels() const { return source_channels_; }
  std::size_t channel_count() const {
    return layout_ == ChannelLayout::Individual ? source_channels_ : 1;
  }
  std::size_t plane_count() const { return 2 * channel_count(); }
  std::size_t cell_size() const { return cell_size_; }
  void set_cell_size(std::size_t s) {
    if (s == 0) fail_validation("flow map cell size must be >= 1");
    cell_size_ = s;
  }

  bool contains(std::ptrdiff_t cx, std::ptrdiff_t cy) const {
    return cx >= 0 && cy >= 0 && static_cast<std::size_t>(cx) < width_ &&
           static_cast<std::size_t>(cy) < height_;
  }

  Vec2 at(std::size_t channel, std::size_t cx, std::size_t cy) const {
    const auto cell = cy * width_ + cx;
    return {plane(2 * channel)[cell], plane(2 * channel + 1)[cell]};
  }

  void set(std::size_t channel, std::size_t cx, std::size_t cy, Vec2 v) {
    const auto cell = cy * width_ + cx;
    plane(2 * channel)[cell] = v.x;
    plane(2 * channel + 1)[cell] = v.y;
  }

  std::span<const double> plane(std::size_t index) const {
    return {data_.data() + index * width_ * height_, width_ * height_};
  }
  std::span<double> plane(std::size_t index) {
    return {data_.data() + index * width_ * height_, width_ * height_};
  }

  /// Per-cell contributor counts (P(s)). Empty when unknown, e.g. for grids
  /// read back from a dump, which stores vectors only.
  bool has_contributor_counts() const { return !counts_.empty(); }
  std::uint32_t contributors(std::size_t channel, std::size_t cx, std::size_t cy) const {
    return counts_[(channel * height_ + cy) * width_ + cx];
  }
  void set_contributors(std::size_t channel, std::size_t cx, std::size_t cy, std::uint32_t n) {
    counts_[(channel * height_ + cy) * width_ + cx] = n;
  }
  void drop_contributor_counts() {
    counts_.clear();
    counts_.shrink_to_fit();
  }

  Vec2 cell_center(std::size_t cx, std::size_t cy) const {
    const double s = static_cast<double>(cell_size_);
    const double off = (s - 1.0) / 2.0;
    return {static_cast<double>(cx) * s + off, static_cast<double>(cy) * s + off};
  }

  /// Continuous cell coordinates of a pixel position (inverse of cell_center).
  Vec2 to_cell(Vec2 pixel) const {
    const double s = static_cast<double>(cell_size_);
    const double off = (s - 1.0) / 2.0;
    return {(pixel.x - off) / s, (pixel.y - off) / s};
  }

  /// True when every vector component is zero.
  bool is_zero() const {
    for (const double v : data_)
      if (v != 0.0) return false;
    return true;
  }

  /// Plane data and header equality; contributor counts are not compared.
  friend bool operator==(const FlowMapGrid& a, const FlowMapGrid& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.layout_ == b.layout_ &&
           a.source_channels_ == b.source_channels_ && a.data_ == b.data_;
  }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  ChannelLayout layout_ = ChannelLayout::Individual;
  std::size_t source_channels_ = 0;
  std::size_t cell_size_ = 1;
  std::vector<double> data_;
  std::vector<std::uint32_t> counts_;
};

}  // namespace tml
