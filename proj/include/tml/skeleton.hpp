#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tml/error.hpp"
#include "tml/kv_config.hpp"

namespace tml {

inline constexpr std::size_t kNoLimb = std::numeric_limits<std::size_t>::max();

/// A limb links two adjacent joints. `parent` is the endpoint closer to the root.
struct Limb {
  std::size_t parent = 0;
  std::size_t child = 0;
  friend bool operator==(const Limb&, const Limb&) = default;
};

/// Named set of joints reported together by the evaluator (e.g. "Wri").
struct JointGroup {
  std::string name;
  std::vector<std::size_t> joints;
  friend bool operator==(const JointGroup&, const JointGroup&) = default;
};

struct SkeletonTopology {
  std::string name;
  std::vector<std::string> joint_names;
  std::vector<Limb> limbs;
  /// Limb channel each joint is scored against; must be incident to the joint.
  std::vector<std::size_t> joint_channel;
  /// Endpoints of the head segment used for PCKh normalization.
  std::pair<std::size_t, std::size_t> head_segment{0, 0};
  std::vector<JointGroup> groups;

  std::size_t joint_count() const { return joint_names.size(); }
  std::size_t limb_count() const { return limbs.size(); }

  friend bool operator==(const SkeletonTopology&, const SkeletonTopology&) = default;
};

/// Assigns every joint the limb leading to it from `root`; the root takes its
/// first incident limb. Joints unreachable from the root get kNoLimb.
inline std::vector<std::size_t> derive_joint_channels(std::size_t joint_count,
                                                      const std::vector<Limb>& limbs,
                                                      std::size_t root) {
  std::vector<std::size_t> channel(joint_count, kNoLimb);
  if (root >= joint_count) return channel;
  std::vector<std::vector<std::size_t>> incident(joint_count);
  for (std::size_t l = 0; l < limbs.size(); ++l) {
    const auto [a, b] = limbs[l];
    if (a >= joint_count || b >= joint_count || a == b) continue;
    incident[a].push_back(l);
    incident[b].push_back(l);
  }
  std::vector<bool> seen(joint_count, false);
  std::queue<std::size_t> frontier;
  seen[root] = true;
  frontier.push(root);
  if (!incident[root].empty()) channel[root] = incident[root].front();
  while (!frontier.empty()) {
    const auto j = frontier.front();
    frontier.pop();
    for (const auto l : incident[j]) {
      const auto other = limbs[l].parent == j ? limbs[l].child : limbs[l].parent;
      if (seen[other]) continue;
      seen[other] = true;
      channel[other] = l;
      frontier.push(other);
    }
  }
  return channel;
}

/// PoseTrack-2017 joint order with a 14-limb tree rooted at the neck
/// (head_bottom). Each joint is scored against the limb that reaches it from
/// the neck, e.g. wrist -> lower arm, knee -> thigh; the neck itself uses the
/// neck-nose limb.
///
///   idx  joint            idx  joint
///    0   right_ankle       8   right_shoulder
///    1   right_knee        9   left_shoulder
///    2   right_hip        10   left_elbow
///    3   left_hip         11   left_wrist
///    4   left_knee        12   head_bottom (neck)
///    5   left_ankle       13   nose
///    6   right_wrist      14   head_top
///    7   right_elbow
inline SkeletonTopology default_topology() {
  SkeletonTopology t;
  t.name = "posetrack15";
  t.joint_names = {"right_ankle", "right_knee",     "right_hip",     "left_hip",
                   "left_knee",   "left_ankle",     "right_wrist",   "right_elbow",
                   "right_shoulder", "left_shoulder", "left_elbow",  "left_wrist",
                   "head_bottom", "nose",           "head_top"};
  t.limbs = {
      {12, 13}, {13, 14},          // neck-nose, nose-head_top
      {12, 8},  {8, 7},  {7, 6},   // right arm
      {12, 9},  {9, 10}, {10, 11}, // left arm
      {8, 2},   {2, 1},  {1, 0},   // right torso side, thigh, shin
      {9, 3},   {3, 4},  {4, 5},   // left torso side, thigh, shin
  };
  t.head_segment = {12, 14};
  t.joint_channel = derive_joint_channels(t.joint_count(), t.limbs, t.head_segment.first);
  t.groups = {{"Head", {12, 13, 14}}, {"Shou", {8, 9}}, {"Elb", {7, 10}}, {"Wri", {6, 11}},
              {"Hip", {2, 3}},        {"Knee", {1, 4}}, {"Ankl", {0, 5}}};
  return t;
}

enum class TopologyIssue {
  Empty,
  EndpointOutOfRange,
  SelfLoop,
  DuplicateLimb,
  Cycle,
  Disconnected,
  ChannelCountMismatch,
  ChannelNotIncident,
  HeadSegmentOutOfRange,
  GroupJointOutOfRange,
};

struct TopologyViolation {
  TopologyIssue issue;
  std::size_t index;  // limb, joint, or group index depending on the issue
  std::string message;
};

/// Reports every invariant violation; an empty result means the topology is
/// valid. Total over arbitrary index values.
inline std::vector<TopologyViolation> validate_topology(const SkeletonTopology& t) {
  std::vector<TopologyViolation> out;
  const std::size_t n = t.joint_count();
  auto report = [&](TopologyIssue issue, std::size_t index, std::string message) {
    out.push_back({issue, index, std::move(message)});
  };
  if (n == 0) {
    report(TopologyIssue::Empty, 0, "topology has no joints");
    return out;
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t l = 0; l < t.limbs.size(); ++l) {
    const auto [a, b] = t.limbs[l];
    const auto id = std::to_string(l);
    if (a >= n || b >= n) {
      report(TopologyIssue::EndpointOutOfRange, l, "limb " + id + ": endpoint out of range");
      continue;
    }
    if (a == b) {
      report(TopologyIssue::SelfLoop, l, "limb " + id + ": self-loop limb");
      continue;
    }
    if (!seen.insert({std::min(a, b), std::max(a, b)}).second) {
      report(TopologyIssue::DuplicateLimb, l, "limb " + id + ": duplicate limb");
      continue;
    }
    const auto ra = find(a);
    const auto rb = find(b);
    if (ra == rb) {
      report(TopologyIssue::Cycle, l, "limb " + id + ": closes a cycle");
      continue;
    }
    parent[ra] = rb;
  }
  for (std::size_t j = 1; j < n; ++j) {
    if (find(j) != find(0)) {
      report(TopologyIssue::Disconnected, j,
             "joint " + std::to_string(j) + ": disconnected from joint 0");
    }
  }

  if (t.joint_channel.size() != n) {
    report(TopologyIssue::ChannelCountMismatch, t.joint_channel.size(),
           "joint_channel has " + std::to_string(t.joint_channel.size()) + " entries for " +
               std::to_string(n) + " joints");
  } else {
    for (std::size_t j = 0; j < n; ++j) {
      const auto l = t.joint_channel[j];
      const bool incident =
          l < t.limbs.size() && (t.limbs[l].parent == j || t.limbs[l].child == j);
      if (!incident)
        report(TopologyIssue::ChannelNotIncident, j,
               "joint " + std::to_string(j) + ": joint_channel is not an incident limb");
    }
  }

  if (t.head_segment.first >= n || t.head_segment.second >= n)
    report(TopologyIssue::HeadSegmentOutOfRange, 0, "head_segment endpoint out of range");

  for (std::size_t g = 0; g < t.groups.size(); ++g)
    for (const auto j : t.groups[g].joints)
      if (j >= n)
        report(TopologyIssue::GroupJointOutOfRange, g,
               "group '" + t.groups[g].name + "': joint index out of range");
  return out;
}

namespace detail {
inline std::size_t to_index(std::int64_t v, const std::string& key) {
  if (v < 0) fail_validation("topology key '" + key + "': negative index");
  return static_cast<std::size_t>(v);
}
}  // namespace detail

/// Builds a topology from `joints = [...]`, `limbs = [[a,b],...]`,
/// `head_segment = [a,b]` and optional `name`, `joint_channel`. Without an
/// explicit joint_channel the mapping is derived from the head_segment root.
/// Each joint becomes its own evaluation group. Throws on invalid topologies.
inline SkeletonTopology topology_from_config(const KeyValueConfig& cfg) {
  SkeletonTopology t;
  t.name = cfg.has("name") ? cfg.get_string("name") : "custom";
  t.joint_names = cfg.get_string_list("joints");
  for (const auto& row : cfg.get_int_matrix("limbs")) {
    if (row.size() != 2) fail_validation("topology key 'limbs': every limb needs two endpoints");
    t.limbs.push_back({detail::to_index(row[0], "limbs"), detail::to_index(row[1], "limbs")});
  }
  const auto head = cfg.get_int_list("head_segment");
  if (head.size() != 2) fail_validation("topology key 'head_segment': expected two indices");
  t.head_segment = {detail::to_index(head[0], "head_segment"),
                    detail::to_index(head[1], "head_segment")};
  if (cfg.has("joint_channel")) {
    for (const auto v : cfg.get_int_list("joint_channel"))
      t.joint_channel.push_back(detail::to_index(v, "joint_channel"));
  } else {
    t.joint_channel = derive_joint_channels(t.joint_count(), t.limbs, t.head_segment.first);
  }
  for (std::size_t j = 0; j < t.joint_count(); ++j) t.groups.push_back({t.joint_names[j], {j}});

  const auto violations = validate_topology(t);
  if (!violations.empty()) fail_validation("invalid topology: " + violations.front().message);
  return t;
}

}  // namespace tml
