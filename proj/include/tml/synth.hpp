#pragma once

// Synthetic ground truth: stick figures of the default topology walking
// through an image, plus a corruption model producing detector-like
// candidates. Used in place of a trained pose network.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tml/error.hpp"
#include "tml/pose.hpp"
#include "tml/random.hpp"
#include "tml/skeleton.hpp"

namespace tml {

enum class MotionPreset { Static, Crossing, Wander, OcclusionMiddle };

inline std::string to_string(MotionPreset p) {
  switch (p) {
    case MotionPreset::Static: return "static";
    case MotionPreset::Crossing: return "crossing";
    case MotionPreset::Wander: return "wander";
    case MotionPreset::OcclusionMiddle: return "occlusion-middle";
  }
  return "?";
}

inline MotionPreset parse_motion_preset(const std::string& name) {
  if (name == "static") return MotionPreset::Static;
  if (name == "crossing") return MotionPreset::Crossing;
  if (name == "wander") return MotionPreset::Wander;
  if (name == "occlusion-middle") return MotionPreset::OcclusionMiddle;
  fail_validation("unknown motion preset '" + name + "'");
}

struct SceneConfig {
  std::size_t people = 2;
  std::size_t frames = 10;
  ImageSize image_size{320, 240};
  MotionPreset motion = MotionPreset::Wander;
  /// Root displacement per frame, pixels.
  double speed = 6.0;
  /// Per-coordinate detection noise, pixels.
  double jitter_sigma = 0.0;
  /// Probability of losing a whole pose in a frame.
  double dropout_prob = 0.0;
  std::uint64_t seed = 0;
  /// Nominal head-top to ankle height; each person varies by +-8%.
  double figure_height = 80.0;
  /// Angle of the crossing paths against the horizontal, degrees.
  double crossing_angle_deg = 60.0;

  void validate() const {
    if (people < 1) fail_validation("scene needs at least one person");
    if (frames < 1) fail_validation("scene needs at least one frame");
    if (motion == MotionPreset::OcclusionMiddle && frames < 3)
      fail_validation("occlusion-middle needs at least three frames");
    if (!(speed >= 0.0)) fail_validation("speed must be >= 0");
    if (!(jitter_sigma >= 0.0)) fail_validation("jitter_sigma must be >= 0");
    if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0))
      fail_validation("dropout_prob must lie in [0,1]");
    if (!(figure_height > 0.0)) fail_validation("figure_height must be > 0");
  }
};

/// A person hidden from the detections at one frame.
struct Occlusion {
  std::uint64_t frame_index = 0;
  TrackId track_id = 0;
  friend bool operator==(const Occlusion&, const Occlusion&) = default;
};

struct SyntheticScene {
  Sequence ground_truth;
  std::optional<Occlusion> occlusion;
};

namespace detail {

// Figure extents relative to the neck, in units of figure height.
inline constexpr double kHalfWidth = 0.32;
inline constexpr double kAbove = 0.21;
inline constexpr double kBelow = 0.75;
inline constexpr double kHeightSpread = 0.08;

inline Vec2 limb_dir(double angle) { return {std::sin(angle), std::cos(angle)}; }

/// Stick figure of the default topology: neck at `root`, gait phase `phase`.
/// Limb lengths depend on `height` only.
inline Pose stick_figure(Vec2 root, double height, double phase) {
  const double h = height;
  const double s = std::sin(phase);
  const double arm = 0.4 * s;
  const double leg = 0.35 * s;
  Pose p(15);
  auto put = [&](std::size_t j, Vec2 v) { p.joints[j] = JointCandidate{v.x, v.y, 1.0, true}; };

  const Vec2 neck = root;
  const Vec2 nose = neck + Vec2{0.0, -0.10 * h};
  const Vec2 top = nose + Vec2{0.0, -0.10 * h};
  const Vec2 rsh = neck + Vec2{-0.12 * h, 0.0};
  const Vec2 lsh = neck + Vec2{0.12 * h, 0.0};
  const Vec2 relb = rsh + 0.17 * h * limb_dir(arm);
  const Vec2 rwri = relb + 0.15 * h * limb_dir(arm + 0.2 + 0.1 * s);
  const Vec2 lelb = lsh + 0.17 * h * limb_dir(-arm);
  const Vec2 lwri = lelb + 0.15 * h * limb_dir(-arm - 0.2 + 0.1 * s);
  const Vec2 rhip = rsh + Vec2{0.04 * h, 0.30 * h};
  const Vec2 lhip = lsh + Vec2{-0.04 * h, 0.30 * h};
  const Vec2 rkne = rhip + 0.22 * h * limb_dir(-leg);
  const Vec2 rank = rkne + 0.22 * h * limb_dir(-leg - 0.1 - 0.1 * std::max(0.0, s));
  const Vec2 lkne = lhip + 0.22 * h * limb_dir(leg);
  const Vec2 lank = lkne + 0.22 * h * limb_dir(leg - 0.1 - 0.1 * std::max(0.0, -s));

  put(0, rank);
  put(1, rkne);
  put(2, rhip);
  put(3, lhip);
  put(4, lkne);
  put(5, lank);
  put(6, rwri);
  put(7, relb);
  put(8, rsh);
  put(9, lsh);
  put(10, lelb);
  put(11, lwri);
  put(12, neck);
  put(13, nose);
  put(14, top);
  return p;
}

/// Folds x into [lo, hi] by mirroring at the bounds.
inline double reflect_into(double x, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return lo;
  double u = std::fmod(x - lo, 2.0 * span);
  if (u < 0.0) u += 2.0 * span;
  return lo + (u <= span ? u : 2.0 * span - u);
}

struct RootBox {
  double x0, x1, y0, y1;
};

struct Walker {
  double height = 0.0;
  double phase0 = 0.0;
  double phase_rate = 0.0;
  Vec2 start;
  Vec2 velocity;
  bool reflect = false;
};

}  // namespace detail

/// Ground-truth sequence for `cfg`. Track ids are 0..people-1 and every joint
/// lies inside the image. Deterministic in cfg.seed.
inline SyntheticScene generate_sequence(const SceneConfig& cfg) {
  cfg.validate();
  using namespace detail;
  Rng rng(cfg.seed, 1);
  const double w = cfg.image_size.width;
  const double h = cfg.image_size.height;
  const double tallest = cfg.figure_height * (1.0 + kHeightSpread);
  const RootBox box{kHalfWidth * tallest + 1.0, w - kHalfWidth * tallest - 1.0,
                    kAbove * tallest + 1.0, h - kBelow * tallest - 1.0};
  if (box.x1 <= box.x0 || box.y1 <= box.y0)
    fail_validation("infeasible layout: figures do not fit the image");

  const double slot_w = 2.0 * kHalfWidth * tallest + 4.0;
  const double slot_h = (kAbove + kBelow) * tallest + 4.0;
  const bool moving = cfg.motion != MotionPreset::Static;
  const double gait = moving ? 0.35 : 0.0;

  std::vector<Walker> walkers(cfg.people);
  for (auto& wk : walkers) {
    wk.height = cfg.figure_height * rng.uniform(1.0 - kHeightSpread, 1.0 + kHeightSpread);
    wk.phase0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    wk.phase_rate = gait;
  }

  if (cfg.motion == MotionPreset::Crossing) {
    const std::size_t bands = (cfg.people + 1) / 2;
    if (static_cast<double>(bands) * slot_h > h)
      fail_validation("infeasible layout: too many people for the image");
    // Paths meet half a frame after the middle frame so the two closest
    // approaches fall on interior frames.
    const double meet = std::floor((static_cast<double>(cfg.frames) - 1.0) / 2.0) + 0.5;
    const double y_margin = (h - static_cast<double>(bands) * slot_h) / 2.0;
    for (std::size_t b = 0; b < bands; ++b) {
      const double band_top = y_margin + static_cast<double>(b) * slot_h;
      const Vec2 center{w / 2.0 + rng.uniform(-5.0, 5.0), band_top + kAbove * tallest + 2.0};
      const double theta = (cfg.crossing_angle_deg + rng.uniform(-3.0, 3.0)) * std::numbers::pi / 180.0;
      const std::size_t first = 2 * b;
      for (std::size_t k = first; k < std::min(first + 2, cfg.people); ++k) {
        const bool single = first + 1 >= cfg.people;
        const double sign = (k == first) ? 1.0 : -1.0;
        const Vec2 dir = single ? Vec2{1.0, 0.0} : Vec2{sign * std::cos(theta), std::sin(theta)};
        walkers[k].velocity = cfg.speed * dir;
        walkers[k].start = center - meet * walkers[k].velocity;
        walkers[k].reflect = false;
      }
    }
  } else {
    const auto cols = static_cast<std::size_t>(w / slot_w);
    const auto rows = static_cast<std::size_t>(h / slot_h);
    if (cfg.people > cols * rows)
      fail_validation("infeasible layout: too many people for the image");
    const double x_margin = (w - static_cast<double>(cols) * slot_w) / 2.0;
    const double y_margin = (h - static_cast<double>(rows) * slot_h) / 2.0;
    for (std::size_t i = 0; i < cfg.people; ++i) {
      const double sx = x_margin + (static_cast<double>(i % cols) + 0.5) * slot_w;
      const double sy = y_margin + static_cast<double>(i / cols) * slot_h + kAbove * tallest + 2.0;
      walkers[i].start = {std::clamp(sx + rng.uniform(-2.0, 2.0), box.x0, box.x1),
                          std::clamp(sy + rng.uniform(-2.0, 2.0), box.y0, box.y1)};
      if (moving) {
        const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
        walkers[i].velocity = cfg.speed * Vec2{std::cos(heading), std::sin(heading)};
        walkers[i].reflect = true;
      }
    }
  }

  SyntheticScene scene;
  scene.ground_truth.topology = default_topology();
  for (std::size_t t = 0; t < cfg.frames; ++t) {
    FramePoses frame;
    frame.frame_index = t;
    frame.image_size = cfg.image_size;
    for (std::size_t i = 0; i < cfg.people; ++i) {
      const auto& wk = walkers[i];
      Vec2 root = wk.start + static_cast<double>(t) * wk.velocity;
      if (wk.reflect) root = {reflect_into(root.x, box.x0, box.x1), reflect_into(root.y, box.y0, box.y1)};
      Pose pose = stick_figure(root, wk.height, wk.phase0 + wk.phase_rate * static_cast<double>(t));
      pose.track_id = static_cast<TrackId>(i);
      for (const auto& j : pose.joints)
        if (!in_bounds(j->position(), cfg.image_size))
          fail_validation("infeasible layout: a figure leaves the image");
      frame.poses.push_back(std::move(pose));
    }
    scene.ground_truth.frames.push_back(std::move(frame));
  }

  if (cfg.motion == MotionPreset::OcclusionMiddle)
    scene.occlusion = Occlusion{(cfg.frames - 1) / 2, static_cast<TrackId>(rng.index(cfg.people))};
  return scene;
}

/// Detector-like candidates: Gaussian coordinate noise, whole-pose dropout,
/// removal of the occluded person, shuffled pose order, no track ids.
/// Confidence is exp(-|noise| / 8 px), so exact joints score 1. Joints pushed
/// outside the image are flagged invisible.
inline Sequence apply_corruption(const SyntheticScene& scene, const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, 2);
  Sequence out;
  out.topology = scene.ground_truth.topology;
  for (const auto& gt_frame : scene.ground_truth.frames) {
    FramePoses frame;
    frame.frame_index = gt_frame.frame_index;
    frame.image_size = gt_frame.image_size;
    for (const auto& gt_pose : gt_frame.poses) {
      const bool occluded = scene.occlusion && scene.occlusion->frame_index == gt_frame.frame_index &&
                            gt_pose.track_id == scene.occlusion->track_id;
      const bool dropped = rng.uniform01() < cfg.dropout_prob;
      if (occluded || dropped) continue;
      Pose pose = gt_pose;
      pose.track_id.reset();
      for (auto& j : pose.joints) {
        if (!j) continue;
        const Vec2 noise{cfg.jitter_sigma * rng.normal(), cfg.jitter_sigma * rng.normal()};
        j->x += noise.x;
        j->y += noise.y;
        j->confidence = std::exp(-norm(noise) / 8.0);
        j->visible = j->visible && in_bounds(j->position(), frame.image_size);
      }
      frame.poses.push_back(std::move(pose));
    }
    for (std::size_t i = frame.poses.size(); i > 1; --i)
      std::swap(frame.poses[i - 1], frame.poses[rng.index(i)]);
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace tml
