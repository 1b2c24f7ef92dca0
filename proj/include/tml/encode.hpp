#pragma once

// Temporal flow maps for limbs: every limb of every paired person is cut into
// equal parts, each part's motion between two frames becomes a unit vector,
// and that vector is painted along the part's motion path with a fixed stroke
// width. Overlapping contributions are averaged per cell and channel.
//
// Sign convention: vectors point from the earlier frame to the later one.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tml/error.hpp"
#include "tml/flow_map.hpp"
#include "tml/geometry.hpp"
#include "tml/pose.hpp"
#include "tml/skeleton.hpp"

namespace tml {

struct EncoderConfig {
  std::size_t parts_per_limb = 20;
  /// Cells whose center is strictly closer than this (pixels) to a part's
  /// motion segment receive that part's vector.
  double stroke_half_width = 1.0;
  /// Displacements at or below this length encode nothing.
  double epsilon_motion = 1e-6;
  ChannelLayout layout = ChannelLayout::Individual;
  /// Pixels per grid cell along each axis.
  std::size_t grid_stride = 1;

  void validate() const {
    if (parts_per_limb < 1) fail_validation("parts_per_limb must be >= 1");
    if (!(stroke_half_width > 0.0)) fail_validation("stroke_half_width must be > 0");
    if (!(epsilon_motion >= 0.0)) fail_validation("epsilon_motion must be >= 0");
    if (grid_stride < 1) fail_validation("grid_stride must be >= 1");
  }
};

/// One separated part of a limb, tracked across the two frames.
struct LimbPart {
  Vec2 later;
  Vec2 earlier;
  std::size_t part = 0;
  std::size_t limb = 0;
  std::size_t person = 0;
};

/// Person index in the later frame paired with its index in the earlier frame.
struct PosePairing {
  std::size_t later = 0;
  std::size_t earlier = 0;
  friend bool operator==(const PosePairing&, const PosePairing&) = default;
};

/// n anchors at the midpoints of n equal sub-segments of [a, b].
inline std::vector<Vec2> subdivide_limb(Vec2 a, Vec2 b, std::size_t n) {
  std::vector<Vec2> anchors;
  anchors.reserve(n);
  const Vec2 d = b - a;
  for (std::size_t i = 0; i < n; ++i)
    anchors.push_back(a + ((static_cast<double>(i) + 0.5) / static_cast<double>(n)) * d);
  return anchors;
}

/// Normalized (later - earlier), or the zero vector when the displacement
/// does not exceed eps.
inline Vec2 part_unit_vector(Vec2 later, Vec2 earlier, double eps) {
  const Vec2 d = later - earlier;
  const double len = norm(d);
  if (!(len > eps)) return {};
  return d / len;
}

/// Running per-cell sums and contributor counts for a grid under construction.
class FlowAccumulator {
 public:
  FlowAccumulator(std::size_t width, std::size_t height, std::size_t channels,
                  std::size_t cell_size = 1)
      : shape_(width, height, ChannelLayout::Individual, channels, cell_size) {}

  const FlowMapGrid& shape() const { return shape_; }

  /// Adds v to every cell of `channel` whose center lies strictly within
  /// half_width of the segment [a, b]. Parts of the stroke outside the grid
  /// are clipped. A zero v contributes nothing.
  void add_stroke(std::size_t channel, Vec2 a, Vec2 b, Vec2 v, double half_width) {
    if (v.x == 0.0 && v.y == 0.0) return;
    if (channel >= shape_.channel_count()) fail_validation("flow channel out of range");
    if (shape_.width() == 0 || shape_.height() == 0) return;
    // Fixed endpoint order keeps the coverage test bit-identical when the
    // two frames swap roles.
    if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);

    const Vec2 lo = shape_.to_cell({std::min(a.x, b.x) - half_width, std::min(a.y, b.y) - half_width});
    const Vec2 hi = shape_.to_cell({std::max(a.x, b.x) + half_width, std::max(a.y, b.y) + half_width});
    if (!is_finite(lo) || !is_finite(hi)) return;
    const double max_x = static_cast<double>(shape_.width() - 1);
    const double max_y = static_cast<double>(shape_.height() - 1);
    if (hi.x < 0.0 || hi.y < 0.0 || lo.x > max_x || lo.y > max_y) return;
    const auto x0 = static_cast<std::size_t>(std::max(0.0, std::ceil(lo.x)));
    const auto y0 = static_cast<std::size_t>(std::max(0.0, std::ceil(lo.y)));
    const auto x1 = static_cast<std::size_t>(std::min(max_x, std::floor(hi.x)));
    const auto y1 = static_cast<std::size_t>(std::min(max_y, std::floor(hi.y)));

    for (std::size_t cy = y0; cy <= y1; ++cy) {
      for (std::size_t cx = x0; cx <= x1; ++cx) {
        if (!(distance_to_segment(shape_.cell_center(cx, cy), a, b) < half_width)) continue;
        shape_.set(channel, cx, cy, shape_.at(channel, cx, cy) + v);
        shape_.set_contributors(channel, cx, cy, shape_.contributors(channel, cx, cy) + 1);
      }
    }
  }

  /// Individual-layout grid holding the per-cell mean of all contributions.
  FlowMapGrid finish() const& { return FlowAccumulator(*this).finish_in_place(); }
  FlowMapGrid finish() && { return finish_in_place(); }

 private:
  FlowMapGrid finish_in_place() {
    FlowMapGrid& out = shape_;
    for (std::size_t c = 0; c < out.channel_count(); ++c)
      for (std::size_t cy = 0; cy < out.height(); ++cy)
        for (std::size_t cx = 0; cx < out.width(); ++cx)
          if (const auto n = out.contributors(c, cx, cy); n > 1)
            out.set(c, cx, cy, out.at(c, cx, cy) / static_cast<double>(n));
    return std::move(out);
  }

  FlowMapGrid shape_;  // holds sums until finish()
};

/// Paints one part's unit vector along its motion path into limb channel
/// `part.limb`.
inline void rasterize_part(FlowAccumulator& acc, const LimbPart& part, Vec2 v, double half_width) {
  acc.add_stroke(part.limb, part.later, part.earlier, v, half_width);
}

/// Collapses an individual grid into one channel: per cell, the mean over the
/// channels that received any contribution. Grids without contributor counts
/// treat any nonzero vector as a contribution.
inline FlowMapGrid accumulate_channels(const FlowMapGrid& g) {
  if (g.layout() != ChannelLayout::Individual)
    fail_validation("accumulate_channels expects an individual-layout grid");
  FlowMapGrid out(g.width(), g.height(), ChannelLayout::Accumulated, g.source_channels(),
                  g.cell_size());
  for (std::size_t cy = 0; cy < g.height(); ++cy) {
    for (std::size_t cx = 0; cx < g.width(); ++cx) {
      Vec2 sum;
      std::uint32_t n = 0;
      for (std::size_t c = 0; c < g.channel_count(); ++c) {
        const Vec2 v = g.at(c, cx, cy);
        const bool contributed = g.has_contributor_counts() ? g.contributors(c, cx, cy) > 0
                                                            : (v.x != 0.0 || v.y != 0.0);
        if (!contributed) continue;
        sum += v;
        ++n;
      }
      if (n == 0) continue;
      out.set(0, cx, cy, sum / static_cast<double>(n));
      out.set_contributors(0, cx, cy, n);
    }
  }
  if (!g.has_contributor_counts()) out.drop_contributor_counts();
  return out;
}

namespace detail {

inline void check_frame_pair(const FramePoses& later, const FramePoses& earlier,
                             std::span<const PosePairing> pairing) {
  if (later.image_size != earlier.image_size)
    fail_validation("frames of an encoded pair must share the image size");
  for (const auto& p : pairing)
    if (p.later >= later.poses.size() || p.earlier >= earlier.poses.size())
      fail_validation("pairing refers to a pose index out of range");
}

inline std::size_t cells_for(std::uint32_t pixels, std::size_t stride) {
  return (static_cast<std::size_t>(pixels) + stride - 1) / stride;
}

inline FlowMapGrid finalize_layout(FlowAccumulator&& acc, ChannelLayout layout) {
  auto grid = std::move(acc).finish();
  return layout == ChannelLayout::Accumulated ? accumulate_channels(grid) : grid;
}

}  // namespace detail

/// Every limb part of the paired persons, for limbs whose two joints are
/// usable in both frames. Parts are ordered by pairing, limb, then part.
inline std::vector<LimbPart> limb_parts(const FramePoses& later, const FramePoses& earlier,
                                        std::span<const PosePairing> pairing,
                                        const SkeletonTopology& topo, std::size_t parts_per_limb) {
  detail::check_frame_pair(later, earlier, pairing);
  std::vector<LimbPart> parts;
  for (std::size_t person = 0; person < pairing.size(); ++person) {
    const Pose& pl = later.poses[pairing[person].later];
    const Pose& pe = earlier.poses[pairing[person].earlier];
    for (std::size_t l = 0; l < topo.limb_count(); ++l) {
      const auto [a, b] = topo.limbs[l];
      if (!(pl.usable(a) && pl.usable(b) && pe.usable(a) && pe.usable(b))) continue;
      const auto anchors_later = subdivide_limb(pl.at(a), pl.at(b), parts_per_limb);
      const auto anchors_earlier = subdivide_limb(pe.at(a), pe.at(b), parts_per_limb);
      for (std::size_t k = 0; k < parts_per_limb; ++k)
        parts.push_back({anchors_later[k], anchors_earlier[k], k, l, person});
    }
  }
  return parts;
}

/// Encodes the limb flow map between two frames. `pairing` lists which
/// person in `later` is the same individual as which person in `earlier`.
inline FlowMapGrid encode_tml(const FramePoses& later, const FramePoses& earlier,
                              std::span<const PosePairing> pairing, const SkeletonTopology& topo,
                              const EncoderConfig& cfg) {
  cfg.validate();
  detail::check_frame_pair(later, earlier, pairing);
  FlowAccumulator acc(detail::cells_for(later.image_size.width, cfg.grid_stride),
                      detail::cells_for(later.image_size.height, cfg.grid_stride),
                      topo.limb_count(), cfg.grid_stride);
  for (const auto& part : limb_parts(later, earlier, pairing, topo, cfg.parts_per_limb))
    rasterize_part(acc, part, part_unit_vector(part.later, part.earlier, cfg.epsilon_motion),
                   cfg.stroke_half_width);
  return detail::finalize_layout(std::move(acc), cfg.layout);
}

/// Joint-flow baseline: one stroke per joint along its own motion, with one
/// channel per joint instead of per limb. parts_per_limb is ignored.
inline FlowMapGrid encode_jointflow(const FramePoses& later, const FramePoses& earlier,
                                    std::span<const PosePairing> pairing,
                                    const SkeletonTopology& topo, const EncoderConfig& cfg) {
  cfg.validate();
  detail::check_frame_pair(later, earlier, pairing);
  FlowAccumulator acc(detail::cells_for(later.image_size.width, cfg.grid_stride),
                      detail::cells_for(later.image_size.height, cfg.grid_stride),
                      topo.joint_count(), cfg.grid_stride);
  for (const auto& pair : pairing) {
    const Pose& pl = later.poses[pair.later];
    const Pose& pe = earlier.poses[pair.earlier];
    for (std::size_t j = 0; j < topo.joint_count(); ++j) {
      if (!(pl.usable(j) && pe.usable(j))) continue;
      const Vec2 v = part_unit_vector(pl.at(j), pe.at(j), cfg.epsilon_motion);
      acc.add_stroke(j, pl.at(j), pe.at(j), v, cfg.stroke_half_width);
    }
  }
  return detail::finalize_layout(std::move(acc), cfg.layout);
}

enum class FlowMapKind { Limb, Joint };

/// encode_tml or encode_jointflow depending on `kind`.
inline FlowMapGrid encode_flow(FlowMapKind kind, const FramePoses& later, const FramePoses& earlier,
                               std::span<const PosePairing> pairing, const SkeletonTopology& topo,
                               const EncoderConfig& cfg) {
  return kind == FlowMapKind::Limb ? encode_tml(later, earlier, pairing, topo, cfg)
                                   : encode_jointflow(later, earlier, pairing, topo, cfg);
}

/// Pairs poses of the two frames that carry the same track id.
inline std::vector<PosePairing> pair_by_track_id(const FramePoses& later,
                                                 const FramePoses& earlier) {
  std::vector<PosePairing> out;
  for (std::size_t i = 0; i < later.poses.size(); ++i) {
    if (!later.poses[i].track_id) continue;
    for (std::size_t k = 0; k < earlier.poses.size(); ++k) {
      if (earlier.poses[k].track_id == later.poses[i].track_id) {
        out.push_back({i, k});
        break;
      }
    }
  }
  return out;
}

}  // namespace tml
