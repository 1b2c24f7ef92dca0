#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tml/error.hpp"
#include "tml/flow_map.hpp"
#include "tml/geometry.hpp"
#include "tml/pose.hpp"
#include "tml/skeleton.hpp"

namespace tml {

/// Pair scores are std::optional<double>; nullopt marks a forbidden pair
/// (no joints in common).
using PairScore = std::optional<double>;

struct ScoreConfig {
  /// Weight of the flow term against the distance similarity.
  double alpha = 0.5;
  /// Midpoint samples of the line integral per joint.
  std::size_t integral_samples = 20;
  /// Pixels; the distance term enters as exp(-S_d / distance_scale).
  double distance_scale = 32.0;
  /// Joint displacements at or below this length contribute 0 to S_T.
  double epsilon_motion = 1e-6;
  /// Bilinear instead of nearest-cell lookups.
  bool bilinear = false;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail_validation("alpha must lie in [0,1]");
    if (integral_samples < 1) fail_validation("integral_samples must be >= 1");
    if (!(distance_scale > 0.0)) fail_validation("distance_scale must be > 0");
  }
};

/// Channel a joint is read from. Limb maps use the topology's joint_channel,
/// joint-flow maps (one channel per joint) the joint itself, accumulated maps
/// their single channel.
inline std::size_t flow_channel_for(const FlowMapGrid& grid, const SkeletonTopology& topo,
                                    std::size_t joint) {
  if (grid.layout() == ChannelLayout::Accumulated) return 0;
  if (grid.source_channels() == topo.joint_count() && topo.joint_count() != topo.limb_count())
    return joint;
  return topo.joint_channel[joint];
}

/// Flow vector at a pixel position; zero outside the grid.
inline Vec2 sample_flow(const FlowMapGrid& grid, std::size_t channel, Vec2 pixel, bool bilinear) {
  const Vec2 c = grid.to_cell(pixel);
  if (!bilinear) {
    const auto cx = static_cast<std::ptrdiff_t>(std::lround(c.x));
    const auto cy = static_cast<std::ptrdiff_t>(std::lround(c.y));
    if (!grid.contains(cx, cy)) return {};
    return grid.at(channel, static_cast<std::size_t>(cx), static_cast<std::size_t>(cy));
  }
  const double fx = std::floor(c.x);
  const double fy = std::floor(c.y);
  const double tx = c.x - fx;
  const double ty = c.y - fy;
  Vec2 out;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const auto cx = static_cast<std::ptrdiff_t>(fx) + dx;
      const auto cy = static_cast<std::ptrdiff_t>(fy) + dy;
      if (!grid.contains(cx, cy)) continue;
      const double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty);
      out += w * grid.at(channel, static_cast<std::size_t>(cx), static_cast<std::size_t>(cy));
    }
  }
  return out;
}

/// Flow agreement S_T of associating `earlier` with `later`: for every common
/// joint, the flow sampled along the joint's path (midpoint rule, U samples)
/// projected on the path direction, averaged over samples and then joints.
/// The grid must have been encoded with the same frame order.
inline PairScore tml_score(const Pose& later, const Pose& earlier, const FlowMapGrid& grid,
                           const SkeletonTopology& topo, const ScoreConfig& cfg) {
  const auto joints = common_joints(later, earlier);
  if (joints.empty()) return std::nullopt;
  const std::size_t samples = cfg.integral_samples;
  double total = 0.0;
  for (const auto j : joints) {
    const Vec2 from = later.at(j);
    const Vec2 to = earlier.at(j);
    const Vec2 d = from - to;
    const double len = norm(d);
    if (!(len > cfg.epsilon_motion)) continue;
    const Vec2 dir = d / len;
    const auto channel = flow_channel_for(grid, topo, j);
    double line = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
      line += dot(sample_flow(grid, channel, lerp(from, to, u), cfg.bilinear), dir);
    }
    total += line / static_cast<double>(samples);
  }
  return total / static_cast<double>(joints.size());
}

/// Mean Euclidean distance S_d over common joints, in pixels.
inline PairScore distance_score(const Pose& a, const Pose& b) {
  const auto joints = common_joints(a, b);
  if (joints.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto j : joints) sum += distance(a.at(j), b.at(j));
  return sum / static_cast<double>(joints.size());
}

/// S = alpha * S_T + (1 - alpha) * exp(-S_d / distance_scale).
inline PairScore association_score(PairScore flow, PairScore dist, const ScoreConfig& cfg) {
  if (!flow || !dist) return std::nullopt;
  return cfg.alpha * *flow + (1.0 - cfg.alpha) * std::exp(-*dist / cfg.distance_scale);
}

/// Scores of every (earlier pose, later pose) pair. Rows index `earlier`,
/// columns index `later`.
class AssociationMatrix {
 public:
  AssociationMatrix() = default;
  AssociationMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const PairScore& at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  PairScore& at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<PairScore> entries_;
};

inline AssociationMatrix association_matrix(std::span<const Pose> earlier,
                                             std::span<const Pose> later, const FlowMapGrid& grid,
                                             const SkeletonTopology& topo,
                                             const ScoreConfig& cfg) {
  cfg.validate();
  AssociationMatrix m(earlier.size(), later.size());
  for (std::size_t r = 0; r < earlier.size(); ++r)
    for (std::size_t c = 0; c < later.size(); ++c)
      m.at(r, c) = association_score(tml_score(later[c], earlier[r], grid, topo, cfg),
                                     distance_score(later[c], earlier[r]), cfg);
  return m;
}

}  // namespace tml
