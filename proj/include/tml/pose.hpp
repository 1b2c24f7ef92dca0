#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tml/geometry.hpp"
#include "tml/skeleton.hpp"

namespace tml {

using TrackId = std::uint32_t;

struct JointCandidate {
  double x = 0.0;
  double y = 0.0;
  double confidence = 1.0;
  bool visible = true;

  Vec2 position() const { return {x, y}; }
  friend bool operator==(const JointCandidate&, const JointCandidate&) = default;
};

/// One person. Missing joints are empty slots; (0,0) is a valid pixel.
struct Pose {
  std::vector<std::optional<JointCandidate>> joints;
  std::optional<TrackId> track_id;

  Pose() = default;
  explicit Pose(std::size_t joint_count) : joints(joint_count) {}

  /// Present and visible; only such joints take part in encoding and scoring.
  bool usable(std::size_t j) const { return j < joints.size() && joints[j] && joints[j]->visible; }
  Vec2 at(std::size_t j) const { return joints[j]->position(); }

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Number of usable joints (n_J).
inline std::size_t present_count(const Pose& p) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < p.joints.size(); ++j) n += p.usable(j) ? 1 : 0;
  return n;
}

/// Ascending joint indices usable in both poses.
inline std::vector<std::size_t> common_joints(const Pose& a, const Pose& b) {
  std::vector<std::size_t> out;
  const auto n = std::min(a.joints.size(), b.joints.size());
  for (std::size_t j = 0; j < n; ++j)
    if (a.usable(j) && b.usable(j)) out.push_back(j);
  return out;
}

/// Mean of the usable joints, or nullopt when the pose has none.
inline std::optional<Vec2> centroid(const Pose& p) {
  Vec2 sum;
  std::size_t n = 0;
  for (std::size_t j = 0; j < p.joints.size(); ++j) {
    if (!p.usable(j)) continue;
    sum += p.at(j);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct ImageSize {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

inline bool in_bounds(Vec2 p, ImageSize size) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x < size.width && p.y < size.height;
}

struct FramePoses {
  std::uint64_t frame_index = 0;
  std::vector<Pose> poses;
  ImageSize image_size;

  friend bool operator==(const FramePoses&, const FramePoses&) = default;
};

struct Sequence {
  SkeletonTopology topology;
  std::vector<FramePoses> frames;

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

/// Checks the value-type invariants; throws a validation Error naming the
/// first offending frame/pose/joint.
inline void validate_sequence(const Sequence& seq) {
  const auto n = seq.topology.joint_count();
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    const auto& frame = seq.frames[f];
    const auto where = "frame " + std::to_string(frame.frame_index);
    if (f > 0 && frame.frame_index <= seq.frames[f - 1].frame_index)
      fail_validation(where + ": frame indices must be strictly increasing");
    std::vector<TrackId> ids;
    for (std::size_t p = 0; p < frame.poses.size(); ++p) {
      const auto& pose = frame.poses[p];
      const auto pwhere = where + ", pose " + std::to_string(p);
      if (pose.joints.size() != n)
        fail_validation(pwhere + ": joint slot count does not match topology");
      if (pose.track_id) {
        for (const auto id : ids)
          if (id == *pose.track_id) fail_validation(pwhere + ": duplicate track id in frame");
        ids.push_back(*pose.track_id);
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (!pose.joints[j]) continue;
        const auto& jc = *pose.joints[j];
        const auto jwhere = pwhere + ", joint " + std::to_string(j);
        if (!is_finite(jc.position())) fail_validation(jwhere + ": non-finite coordinate");
        if (!(jc.confidence >= 0.0 && jc.confidence <= 1.0))
          fail_validation(jwhere + ": confidence outside [0,1]");
        if (jc.visible && !in_bounds(jc.position(), frame.image_size))
          fail_validation(jwhere + ": visible joint outside the image");
      }
    }
  }
}

}  // namespace tml
