#pragma once

// Multi-stride frame-pair sampling and paired geometric augmentation. All
// randomness is a pure function of (rng_seed, draw_index).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>

#include "tml/error.hpp"
#include "tml/geometry.hpp"
#include "tml/pose.hpp"
#include "tml/random.hpp"

namespace tml {

struct StrideConfig {
  /// Largest frame distance between the two frames of a pair.
  std::size_t max_stride = 4;
  std::uint64_t rng_seed = 0;
  double scale_min = 1.0;
  double scale_max = 1.0;
  /// Rotations are drawn uniformly from [-rotation_range, rotation_range] degrees.
  double rotation_range = 0.0;
  ImageSize crop_size{256, 256};

  void validate() const {
    if (max_stride < 1) fail_validation("max_stride must be >= 1");
    if (!(scale_min > 0.0 && scale_min <= scale_max)) fail_validation("need 0 < scale_min <= scale_max");
    if (!(rotation_range >= 0.0 && rotation_range <= 180.0))
      fail_validation("rotation_range must lie in [0,180] degrees");
    if (crop_size.width == 0 || crop_size.height == 0) fail_validation("crop size must be positive");
  }
};

/// Frame positions within a sequence, earlier < later.
struct FramePair {
  std::size_t earlier = 0;
  std::size_t later = 0;
  std::size_t stride() const { return later - earlier; }
  friend bool operator==(const FramePair&, const FramePair&) = default;
};

/// Draw `draw_index` of the sampler: the stride is uniform over
/// 1..min(max_stride, seq_len - 1), then the start is uniform over the
/// positions that leave room for it.
inline FramePair sample_frame_pair(std::size_t seq_len, const StrideConfig& cfg,
                                   std::uint64_t draw_index) {
  if (seq_len < 2) fail_validation("no pair available: sequence has fewer than two frames");
  if (cfg.max_stride < 1) fail_validation("max_stride must be >= 1");
  Rng rng(cfg.rng_seed, 10, draw_index);
  const std::size_t strides = std::min(cfg.max_stride, seq_len - 1);
  const std::size_t stride = 1 + rng.index(strides);
  const std::size_t start = rng.index(seq_len - stride);
  return {start, start + stride};
}

/// Similarity transform shared by both frames of a pair: scale about
/// `center`, rotate about `center`, then shift by -crop_origin.
struct PairedTransform {
  Vec2 center;
  double scale = 1.0;
  double rotation_deg = 0.0;
  Vec2 crop_origin;
  /// Image size after the transform; keypoints outside it become invisible.
  ImageSize output_size;

  Vec2 apply(Vec2 p) const {
    const double rad = rotation_deg * std::numbers::pi / 180.0;
    return center + rotate(scale * (p - center), rad) - crop_origin;
  }

  Vec2 invert(Vec2 q) const {
    const double rad = rotation_deg * std::numbers::pi / 180.0;
    return center + rotate(q + crop_origin - center, -rad) / scale;
  }
};

namespace detail {
inline FramePoses transform_frame(const FramePoses& in, const PairedTransform& t) {
  FramePoses out = in;
  out.image_size = t.output_size;
  for (auto& pose : out.poses) {
    for (auto& j : pose.joints) {
      if (!j) continue;
      const Vec2 q = t.apply(j->position());
      j->x = q.x;
      j->y = q.y;
      j->visible = j->visible && in_bounds(q, t.output_size);
    }
  }
  return out;
}
}  // namespace detail

/// Applies the identical transform to every keypoint of both frames.
/// Coordinates are kept for keypoints leaving the output window, but they are
/// flagged invisible.
inline std::pair<FramePoses, FramePoses> paired_transform(const FramePoses& first,
                                                          const FramePoses& second,
                                                          const PairedTransform& t) {
  if (!(t.scale > 0.0) || !std::isfinite(t.rotation_deg) || !is_finite(t.center) ||
      !is_finite(t.crop_origin))
    fail_validation("paired transform parameters must be finite with positive scale");
  return {detail::transform_frame(first, t), detail::transform_frame(second, t)};
}

struct PersonCrop {
  FramePoses first;
  FramePoses second;
  std::size_t person = 0;
  Vec2 origin;
  /// Selected person's centroid minus the window center; nonzero only when
  /// the window had to be shifted to stay inside the image.
  Vec2 centroid_offset;
};

/// Picks a person of the first frame uniformly and cuts a crop_size window
/// centered on that person's joint centroid, shifted inside the image when it
/// would cross a border. The same window is applied to the second frame.
inline PersonCrop random_person_crop(const FramePoses& first, const FramePoses& second,
                                     const StrideConfig& cfg, std::uint64_t draw_index) {
  cfg.validate();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < first.poses.size(); ++i)
    if (centroid(first.poses[i])) candidates.push_back(i);
  if (candidates.empty()) fail_validation("random_person_crop: first frame has no person");

  Rng rng(cfg.rng_seed, 11, draw_index);
  const std::size_t person = candidates[rng.index(candidates.size())];
  const Vec2 c = *centroid(first.poses[person]);
  const double cw = cfg.crop_size.width;
  const double ch = cfg.crop_size.height;
  const double max_x = std::max(0.0, static_cast<double>(first.image_size.width) - cw);
  const double max_y = std::max(0.0, static_cast<double>(first.image_size.height) - ch);
  const Vec2 origin{std::clamp(c.x - cw / 2.0, 0.0, max_x), std::clamp(c.y - ch / 2.0, 0.0, max_y)};

  PairedTransform t;
  t.crop_origin = origin;
  t.output_size = cfg.crop_size;
  auto [a, b] = paired_transform(first, second, t);
  return {std::move(a), std::move(b), person, origin, c - (origin + Vec2{cw / 2.0, ch / 2.0})};
}

}  // namespace tml
