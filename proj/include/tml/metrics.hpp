#pragma once

// Keypoint tracking evaluation: PCKh matching, MOTA, MOTP, and per-joint AP.
//
// Matching: per frame and joint type, predictions are visited by confidence
// (descending, ties by pose index) and each takes the nearest still-unmatched
// ground-truth joint within factor * head size (ties by GT pose index). The
// head size of a GT person is the length of the topology's head segment; a
// person without it uses the median over the sequence.
//
// MOTA = 100 * (1 - (FN + FP + IDSW) / GT). An ID switch is a matched joint
// whose predicted track id differs from the one last matched to the same
// (GT track, joint type).
// MOTP = 100 * mean(1 - d / threshold) over matched joints.
// AP = area under the interpolated precision/recall curve of all predictions
// of a joint type ranked by confidence; mAP averages the joint types that
// have ground truth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tml/error.hpp"
#include "tml/geometry.hpp"
#include "tml/pose.hpp"
#include "tml/skeleton.hpp"

namespace tml {

struct JointMatch {
  std::size_t gt_pose = 0;
  std::size_t pred_pose = 0;
  double distance = 0.0;
  double threshold = 0.0;
  friend bool operator==(const JointMatch&, const JointMatch&) = default;
};

/// matches[j] lists the correspondences for joint type j.
struct FrameMatching {
  std::vector<std::vector<JointMatch>> matches;
};

/// Head segment length of a person, if both endpoints are annotated and apart.
inline std::optional<double> head_size(const Pose& p, const SkeletonTopology& topo) {
  const auto [a, b] = topo.head_segment;
  if (a >= p.joints.size() || b >= p.joints.size() || !p.joints[a] || !p.joints[b]) return std::nullopt;
  const double d = distance(p.at(a), p.at(b));
  if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
  return d;
}

/// Median head size over every GT person of the sequence that has one.
inline std::optional<double> median_head_size(const Sequence& gt) {
  std::vector<double> sizes;
  for (const auto& f : gt.frames)
    for (const auto& p : f.poses)
      if (const auto h = head_size(p, gt.topology)) sizes.push_back(*h);
  if (sizes.empty()) return std::nullopt;
  std::sort(sizes.begin(), sizes.end());
  const std::size_t m = sizes.size() / 2;
  return sizes.size() % 2 ? sizes[m] : (sizes[m - 1] + sizes[m]) / 2.0;
}

/// Greedy one-to-one PCKh matching of one frame. GT persons without a head
/// segment use `fallback_head`; if that is absent too their joints cannot be
/// matched.
inline FrameMatching match_joints_pckh(const FramePoses& gt, const FramePoses& pred,
                                       const SkeletonTopology& topo, double thresh_factor = 0.5,
                                       std::optional<double> fallback_head = std::nullopt) {
  if (!(thresh_factor >= 0.0)) fail_validation("PCKh threshold factor must be >= 0");
  FrameMatching out;
  out.matches.resize(topo.joint_count());

  std::vector<std::optional<double>> thresholds;
  for (const auto& p : gt.poses) {
    const auto h = head_size(p, topo);
    thresholds.push_back(h ? std::optional(thresh_factor * *h)
                           : fallback_head ? std::optional(thresh_factor * *fallback_head)
                                           : std::nullopt);
  }

  for (std::size_t j = 0; j < topo.joint_count(); ++j) {
    std::vector<std::size_t> order;
    for (std::size_t p = 0; p < pred.poses.size(); ++p)
      if (pred.poses[p].usable(j)) order.push_back(p);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return pred.poses[a].joints[j]->confidence > pred.poses[b].joints[j]->confidence;
    });
    std::vector<char> taken(gt.poses.size(), 0);
    for (const auto p : order) {
      std::optional<std::size_t> best;
      double best_d = 0.0;
      for (std::size_t g = 0; g < gt.poses.size(); ++g) {
        if (taken[g] || !gt.poses[g].usable(j) || !thresholds[g]) continue;
        const double d = distance(pred.poses[p].at(j), gt.poses[g].at(j));
        if (d > *thresholds[g]) continue;
        if (!best || d < best_d) {
          best = g;
          best_d = d;
        }
      }
      if (!best) continue;
      taken[*best] = 1;
      out.matches[j].push_back({*best, p, best_d, *thresholds[*best]});
    }
  }
  return out;
}

struct MotCounts {
  std::size_t gt = 0;
  std::size_t matches = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t idsw = 0;

  MotCounts& operator+=(const MotCounts& o) {
    gt += o.gt;
    matches += o.matches;
    fn += o.fn;
    fp += o.fp;
    idsw += o.idsw;
    return *this;
  }
  /// Absent when there is no ground truth.
  std::optional<double> mota() const {
    if (gt == 0) return std::nullopt;
    return 100.0 * (1.0 - static_cast<double>(fn + fp + idsw) / static_cast<double>(gt));
  }
  friend bool operator==(const MotCounts&, const MotCounts&) = default;
};

struct GroupResult {
  std::string name;
  MotCounts counts;
  std::optional<double> mota;
  /// Mean AP of the group's joint types that have ground truth.
  std::optional<double> ap;
};

struct EvalReport {
  double thresh_factor = 0.5;
  std::vector<MotCounts> joint_counts;
  std::vector<std::optional<double>> joint_ap;
  std::vector<GroupResult> groups;
  MotCounts total;
  std::optional<double> total_mota;
  std::optional<double> motp;
  std::optional<double> mean_ap;
  /// Fallbacks and exclusions applied during evaluation.
  std::vector<std::string> notes;
};

/// Interpolated AP in percent for predictions labeled true/false positive,
/// already sorted by descending confidence, against `gt_count` GT joints.
inline std::optional<double> average_precision(const std::vector<char>& ranked_tp,
                                               std::size_t gt_count) {
  if (gt_count == 0) return std::nullopt;
  std::vector<double> recall, precision;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked_tp.size(); ++i) {
    tp += ranked_tp[i] ? 1 : 0;
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_count));
    precision.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double area = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < recall.size(); ++i) {
    area += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return 100.0 * area;
}

/// Full evaluation of `pred` against `gt`. Frames are aligned by frame_index;
/// predicted frames without a GT counterpart count all their joints as false
/// positives.
inline EvalReport evaluate(const Sequence& gt, const Sequence& pred, double thresh_factor = 0.5) {
  const auto& topo = gt.topology;
  const std::size_t J = topo.joint_count();
  if (pred.topology.joint_count() != J)
    fail_validation("prediction and ground truth use different topologies");

  EvalReport rep;
  rep.thresh_factor = thresh_factor;
  rep.joint_counts.resize(J);

  const auto median = median_head_size(gt);
  std::size_t fallback_persons = 0;
  for (const auto& f : gt.frames)
    for (const auto& p : f.poses)
      if (!head_size(p, topo)) ++fallback_persons;
  if (fallback_persons > 0) {
    if (median)
      rep.notes.push_back(std::to_string(fallback_persons) +
                          " ground-truth person(s) without head segment use the median head size " +
                          std::to_string(*median));
    else
      rep.notes.push_back(std::to_string(fallback_persons) +
                          " ground-truth person(s) without head segment and no head size available: "
                          "their joints cannot be matched");
  }

  struct Ranked {
    double confidence;
    char tp;
  };
  std::vector<std::vector<Ranked>> ranked(J);
  std::map<std::pair<TrackId, std::size_t>, std::optional<TrackId>> last_pred;
  double motp_sum = 0.0;
  std::size_t motp_n = 0;

  const FramePoses empty;
  std::size_t pi = 0;
  auto count_fp_only = [&](const FramePoses& f) {
    for (std::size_t j = 0; j < J; ++j)
      for (const auto& p : f.poses)
        if (p.usable(j)) {
          ++rep.joint_counts[j].fp;
          ranked[j].push_back({p.joints[j]->confidence, 0});
        }
  };

  for (const auto& gf : gt.frames) {
    while (pi < pred.frames.size() && pred.frames[pi].frame_index < gf.frame_index)
      count_fp_only(pred.frames[pi++]);
    const FramePoses* pf = &empty;
    if (pi < pred.frames.size() && pred.frames[pi].frame_index == gf.frame_index) pf = &pred.frames[pi++];

    const auto m = match_joints_pckh(gf, *pf, topo, thresh_factor, median);
    for (std::size_t j = 0; j < J; ++j) {
      auto& c = rep.joint_counts[j];
      std::size_t n_gt = 0, n_pred = 0;
      for (const auto& p : gf.poses) n_gt += p.usable(j) ? 1 : 0;
      std::vector<char> tp(pf->poses.size(), 0);
      for (const auto& match : m.matches[j]) {
        tp[match.pred_pose] = 1;
        motp_sum += 1.0 - (match.threshold > 0.0 ? match.distance / match.threshold : 0.0);
        ++motp_n;
        const auto& gp = gf.poses[match.gt_pose];
        if (!gp.track_id) continue;
        const auto key = std::make_pair(*gp.track_id, j);
        const auto pid = pf->poses[match.pred_pose].track_id;
        const auto it = last_pred.find(key);
        if (it != last_pred.end() && it->second != pid) ++c.idsw;
        last_pred[key] = pid;
      }
      for (std::size_t p = 0; p < pf->poses.size(); ++p) {
        if (!pf->poses[p].usable(j)) continue;
        ++n_pred;
        ranked[j].push_back({pf->poses[p].joints[j]->confidence, tp[p]});
      }
      c.gt += n_gt;
      c.matches += m.matches[j].size();
      c.fn += n_gt - m.matches[j].size();
      c.fp += n_pred - m.matches[j].size();
    }
  }
  while (pi < pred.frames.size()) count_fp_only(pred.frames[pi++]);

  rep.joint_ap.resize(J);
  double ap_sum = 0.0;
  std::size_t ap_n = 0;
  for (std::size_t j = 0; j < J; ++j) {
    std::stable_sort(ranked[j].begin(), ranked[j].end(),
                     [](const Ranked& a, const Ranked& b) { return a.confidence > b.confidence; });
    std::vector<char> labels;
    for (const auto& r : ranked[j]) labels.push_back(r.tp);
    rep.joint_ap[j] = average_precision(labels, rep.joint_counts[j].gt);
    if (rep.joint_ap[j]) {
      ap_sum += *rep.joint_ap[j];
      ++ap_n;
    } else {
      rep.notes.push_back("joint " + topo.joint_names[j] + " has no ground truth; excluded from mAP");
    }
    rep.total += rep.joint_counts[j];
  }
  if (ap_n > 0) rep.mean_ap = ap_sum / static_cast<double>(ap_n);
  rep.total_mota = rep.total.mota();
  if (motp_n > 0) rep.motp = 100.0 * motp_sum / static_cast<double>(motp_n);

  for (const auto& g : topo.groups) {
    GroupResult r{g.name, {}, std::nullopt, std::nullopt};
    double s = 0.0;
    std::size_t n = 0;
    for (const auto j : g.joints) {
      if (j >= J) continue;
      r.counts += rep.joint_counts[j];
      if (rep.joint_ap[j]) {
        s += *rep.joint_ap[j];
        ++n;
      }
    }
    r.mota = r.counts.mota();
    if (n > 0) r.ap = s / static_cast<double>(n);
    rep.groups.push_back(std::move(r));
  }
  return rep;
}

/// Total MOTA (absent without ground truth).
inline std::optional<double> mota(const Sequence& gt, const Sequence& pred, double factor = 0.5) {
  return evaluate(gt, pred, factor).total_mota;
}

inline std::optional<double> motp(const Sequence& gt, const Sequence& pred, double factor = 0.5) {
  return evaluate(gt, pred, factor).motp;
}

inline std::optional<double> mean_ap(const Sequence& gt, const Sequence& pred, double factor = 0.5) {
  return evaluate(gt, pred, factor).mean_ap;
}

}  // namespace tml
