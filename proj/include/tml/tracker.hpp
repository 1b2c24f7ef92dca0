#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tml/assignment.hpp"
#include "tml/encode.hpp"
#include "tml/flow_map.hpp"
#include "tml/pose.hpp"
#include "tml/scoring.hpp"
#include "tml/skeleton.hpp"

namespace tml {

struct TrackerConfig {
  /// Assigned pairs scoring below this are not linked.
  double score_threshold = 0.1;
  /// Joint NMS radius in pixels; 0 disables suppression.
  double nms_radius = 5.0;
  /// Restore poses missing from the middle frame of each frame set.
  bool refine = true;
  ScoreConfig score;
  EncoderConfig encoder;
  FlowMapKind map = FlowMapKind::Limb;

  void validate() const {
    if (!std::isfinite(score_threshold)) fail_validation("score_threshold must be finite");
    if (!(nms_radius >= 0.0)) fail_validation("nms_radius must be >= 0");
    score.validate();
    encoder.validate();
  }
};

struct ActiveTrack {
  TrackId id = 0;
  Pose last_pose;
  std::uint64_t last_frame = 0;
  /// Consecutive frames without a match; a track is retired on its second miss.
  std::size_t misses = 0;
};

struct TrackState {
  TrackId next_id = 0;
  std::vector<ActiveTrack> active;
};

struct RefinementEntry {
  std::uint64_t frame_index = 0;
  TrackId track_id = 0;
  std::string source = "stride2-average";
  friend bool operator==(const RefinementEntry&, const RefinementEntry&) = default;
};

struct TrackedSequence {
  Sequence sequence;
  std::vector<RefinementEntry> refinement_log;
  friend bool operator==(const TrackedSequence&, const TrackedSequence&) = default;
};

/// Supplies the flow map for an ordered frame pair (later, earlier). Stands in
/// for the network's temporal branch.
using FlowSource = std::function<FlowMapGrid(const FramePoses& later, const FramePoses& earlier)>;

/// Flow source that yields empty grids, so every flow score is 0.
inline FlowSource no_flow() {
  return [](const FramePoses&, const FramePoses&) { return FlowMapGrid{}; };
}

/// Flow source encoding maps from annotated ground truth: the frames with the
/// requested indices are looked up in `truth` and paired by track id. Unknown
/// frame indices yield an empty grid.
inline FlowSource ground_truth_flow(Sequence truth, EncoderConfig encoder,
                                    FlowMapKind kind = FlowMapKind::Limb) {
  auto gt = std::make_shared<const Sequence>(std::move(truth));
  return [gt, encoder, kind](const FramePoses& later, const FramePoses& earlier) {
    auto find = [&](std::uint64_t index) -> const FramePoses* {
      const auto it = std::lower_bound(
          gt->frames.begin(), gt->frames.end(), index,
          [](const FramePoses& f, std::uint64_t i) { return f.frame_index < i; });
      return it != gt->frames.end() && it->frame_index == index ? &*it : nullptr;
    };
    const FramePoses* l = find(later.frame_index);
    const FramePoses* e = find(earlier.frame_index);
    if (!l || !e) return FlowMapGrid{};
    const auto pairing = pair_by_track_id(*l, *e);
    return encode_flow(kind, *l, *e, pairing, gt->topology, encoder);
  };
}

namespace detail {

/// Greedy suppression order: confidence descending, then x, then y ascending.
inline std::vector<std::size_t> nms_keep(std::span<const JointCandidate> candidates,
                                         double radius) {
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = candidates[a];
    const auto& cb = candidates[b];
    if (ca.confidence != cb.confidence) return ca.confidence > cb.confidence;
    if (ca.x != cb.x) return ca.x < cb.x;
    return ca.y < cb.y;
  });
  std::vector<std::size_t> kept;
  std::vector<char> removed(candidates.size(), 0);
  for (const auto i : order) {
    if (removed[i]) continue;
    kept.push_back(i);
    for (const auto k : order)
      if (!removed[k] && k != i && distance(candidates[i].position(), candidates[k].position()) <= radius)
        removed[k] = 1;
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace detail

/// Per joint type: keep the most confident candidate, drop every other
/// candidate within `radius` of it, repeat. Survivors keep their input order.
inline std::vector<std::vector<JointCandidate>> nms_joints(
    const std::vector<std::vector<JointCandidate>>& per_type, double radius) {
  std::vector<std::vector<JointCandidate>> out;
  out.reserve(per_type.size());
  for (const auto& candidates : per_type) {
    auto& dst = out.emplace_back();
    for (const auto i : detail::nms_keep(candidates, radius)) dst.push_back(candidates[i]);
  }
  return out;
}

/// Applies joint NMS across all poses of a frame; suppressed joints are
/// removed from their pose and poses left without joints are dropped.
inline FramePoses suppress_duplicate_joints(const FramePoses& frame, std::size_t joint_count,
                                            double radius) {
  FramePoses out = frame;
  if (radius <= 0.0) return out;
  for (std::size_t j = 0; j < joint_count; ++j) {
    std::vector<JointCandidate> candidates;
    std::vector<std::size_t> owner;
    for (std::size_t p = 0; p < out.poses.size(); ++p) {
      if (!out.poses[p].usable(j)) continue;
      candidates.push_back(*out.poses[p].joints[j]);
      owner.push_back(p);
    }
    const auto kept = detail::nms_keep(candidates, radius);
    std::vector<char> keep(candidates.size(), 0);
    for (const auto k : kept) keep[k] = 1;
    for (std::size_t k = 0; k < candidates.size(); ++k)
      if (!keep[k]) out.poses[owner[k]].joints[j].reset();
  }
  std::erase_if(out.poses, [](const Pose& p) {
    return std::none_of(p.joints.begin(), p.joints.end(), [](const auto& j) { return j.has_value(); });
  });
  return out;
}

/// Links the poses of `frame` to the active tracks. `grid` is the flow map of
/// (frame, previous frame). Assigned pairs scoring at least score_threshold
/// inherit the track id; every other pose opens a new track. Tracks left
/// unmatched survive one frame and are retired on their second miss.
inline FramePoses match_frames(TrackState& state, const FramePoses& frame, const FlowMapGrid& grid,
                               const SkeletonTopology& topo, const TrackerConfig& cfg) {
  FramePoses out = frame;
  for (auto& p : out.poses) p.track_id.reset();

  std::vector<Pose> last;
  last.reserve(state.active.size());
  for (const auto& t : state.active) last.push_back(t.last_pose);
  const auto scores = association_matrix(last, out.poses, grid, topo, cfg.score);

  std::vector<char> matched(state.active.size(), 0);
  for (const auto& a : max_score_assignment(scores)) {
    if (*scores.at(a.row, a.col) < cfg.score_threshold) continue;
    auto& track = state.active[a.row];
    out.poses[a.col].track_id = track.id;
    track.last_pose = out.poses[a.col];
    track.last_frame = out.frame_index;
    track.misses = 0;
    matched[a.row] = 1;
  }

  std::vector<ActiveTrack> next;
  for (std::size_t r = 0; r < state.active.size(); ++r) {
    if (!matched[r] && ++state.active[r].misses > 1) continue;
    next.push_back(std::move(state.active[r]));
  }
  for (auto& p : out.poses) {
    if (p.track_id) continue;
    p.track_id = state.next_id++;
    next.push_back({*p.track_id, p, out.frame_index, 0});
  }
  state.active = std::move(next);
  return out;
}

struct RefinementResult {
  FramePoses frame;
  std::vector<RefinementEntry> inserted;
};

/// Joint-wise mean of two poses over their common joints.
inline Pose average_pose(const Pose& a, const Pose& b) {
  Pose out(std::max(a.joints.size(), b.joints.size()));
  for (const auto j : common_joints(a, b)) {
    const auto& ja = *a.joints[j];
    const auto& jb = *b.joints[j];
    out.joints[j] = JointCandidate{(ja.x + jb.x) / 2.0, (ja.y + jb.y) / 2.0,
                                   (ja.confidence + jb.confidence) / 2.0, true};
  }
  out.track_id = a.track_id;
  return out;
}

/// Restores poses missing from the middle frame of (prev, middle, next). The
/// poses of prev and next are associated through the stride-2 map
/// `grid_stride2` (encoded over (next, prev)); a pair that clears the score
/// threshold, carries the same track id on both sides, and whose id is absent
/// from `middle` gets the average of the two poses inserted. Existing poses
/// are never changed.
inline RefinementResult refine_middle_frame(const FramePoses& prev, const FramePoses& middle,
                                            const FramePoses& next, const FlowMapGrid& grid_stride2,
                                            const SkeletonTopology& topo,
                                            const TrackerConfig& cfg) {
  RefinementResult result{middle, {}};
  const auto scores = association_matrix(prev.poses, next.poses, grid_stride2, topo, cfg.score);
  for (const auto& a : max_score_assignment(scores)) {
    if (*scores.at(a.row, a.col) < cfg.score_threshold) continue;
    const Pose& before = prev.poses[a.row];
    const Pose& after = next.poses[a.col];
    if (!before.track_id || before.track_id != after.track_id) continue;
    const bool present = std::any_of(middle.poses.begin(), middle.poses.end(),
                                     [&](const Pose& p) { return p.track_id == before.track_id; });
    if (present) continue;
    result.frame.poses.push_back(average_pose(before, after));
    result.inserted.push_back({middle.frame_index, *before.track_id, "stride2-average"});
  }
  return result;
}

/// Tracks a sequence of candidate poses. Frames are visited in order; each is
/// matched against the active tracks through the stride-1 map of (t, t-1),
/// and once frame t is labeled the middle of (t-2, t-1, t) is refined with
/// the stride-2 map of (t, t-2). First and last frames are never refined.
inline TrackedSequence track_sequence(const Sequence& candidates, const TrackerConfig& cfg,
                                      const FlowSource& flow) {
  cfg.validate();
  TrackedSequence out;
  out.sequence.topology = candidates.topology;
  const auto& topo = candidates.topology;
  auto& frames = out.sequence.frames;
  TrackState state;
  for (std::size_t t = 0; t < candidates.frames.size(); ++t) {
    const auto frame =
        suppress_duplicate_joints(candidates.frames[t], topo.joint_count(), cfg.nms_radius);
    const FlowMapGrid grid = t == 0 ? FlowMapGrid{} : flow(frame, frames[t - 1]);
    frames.push_back(match_frames(state, frame, grid, topo, cfg));

    if (cfg.refine && t >= 2) {
      const FlowMapGrid grid2 = flow(frames[t], frames[t - 2]);
      auto refined = refine_middle_frame(frames[t - 2], frames[t - 1], frames[t], grid2, topo, cfg);
      frames[t - 1] = std::move(refined.frame);
      for (auto& e : refined.inserted) out.refinement_log.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace tml
