#pragma once

// Small tracking scenarios with hand-computed metric values. Every person has
// 15 joints 40 px apart on a row and a head segment of 10 px, so the match
// threshold at factor 0.5 is 5 px.

#include <optional>
#include <string>
#include <vector>

#include "tml/pose.hpp"
#include "tml/skeleton.hpp"

namespace scenario {

inline tml::Pose person(double x0, double y0, std::optional<tml::TrackId> id, double conf = 1.0,
                        tml::Vec2 offset = {}) {
  tml::Pose p(15);
  for (std::size_t j = 0; j < 15; ++j) {
    const double x = x0 + 40.0 * static_cast<double>(j == 14 ? 12 : j);
    const double y = y0 - (j == 14 ? 10.0 : 0.0);
    p.joints[j] = tml::JointCandidate{x + offset.x, y + offset.y, conf, true};
  }
  p.track_id = id;
  return p;
}

inline tml::FramePoses frame(std::uint64_t index, std::vector<tml::Pose> poses) {
  tml::FramePoses f;
  f.frame_index = index;
  f.image_size = {800, 600};
  f.poses = std::move(poses);
  return f;
}

inline tml::Sequence sequence(std::vector<tml::FramePoses> frames) {
  tml::Sequence s;
  s.topology = tml::default_topology();
  s.frames = std::move(frames);
  return s;
}

struct Case {
  std::string name;
  tml::Sequence gt;
  tml::Sequence pred;
  double mota;
  std::optional<double> motp;
  double map;
};

inline std::vector<Case> ledger() {
  std::vector<Case> out;
  const double ya = 100.0, yb = 300.0;

  {  // identical prediction
    std::vector<tml::FramePoses> g;
    for (std::uint64_t t = 0; t < 3; ++t) g.push_back(frame(t, {person(10, ya, 0)}));
    out.push_back({"perfect", sequence(g), sequence(g), 100.0, 100.0, 100.0});
  }
  {  // one of ten frames missed: FN 15 of 150
    std::vector<tml::FramePoses> g, p;
    for (std::uint64_t t = 0; t < 10; ++t) {
      g.push_back(frame(t, {person(10, ya, 0)}));
      p.push_back(frame(t, t == 9 ? std::vector<tml::Pose>{} : std::vector{person(10, ya, 4)}));
    }
    out.push_back({"missed frame", sequence(g), sequence(p), 90.0, 100.0, 90.0});
  }
  {  // ids swapped from frame 5: 2 x 15 switches at that frame, GT 300
    std::vector<tml::FramePoses> g, p;
    for (std::uint64_t t = 0; t < 10; ++t) {
      g.push_back(frame(t, {person(10, ya, 0), person(10, yb, 1)}));
      const bool swapped = t >= 5;
      p.push_back(frame(t, {person(10, ya, swapped ? 1 : 0), person(10, yb, swapped ? 0 : 1)}));
    }
    out.push_back({"identity swap", sequence(g), sequence(p), 90.0, 100.0, 100.0});
  }
  {  // offset by twice the head size: nothing matches, FN 30 + FP 30 of 30
    std::vector<tml::FramePoses> g, p;
    for (std::uint64_t t = 0; t < 2; ++t) {
      g.push_back(frame(t, {person(10, ya, 0)}));
      p.push_back(frame(t, {person(10, ya, 0, 1.0, {20, 0})}));
    }
    out.push_back({"far offset", sequence(g), sequence(p), -100.0, std::nullopt, 0.0});
  }
  {  // one frame exact, one at exactly the threshold
    std::vector<tml::FramePoses> g, p;
    for (std::uint64_t t = 0; t < 2; ++t) {
      g.push_back(frame(t, {person(10, ya, 0)}));
      p.push_back(frame(t, {person(10, ya, 0, 1.0, {t == 1 ? 5.0 : 0.0, 0})}));
    }
    out.push_back({"threshold distance", sequence(g), sequence(p), 100.0, 50.0, 100.0});
  }
  {  // low-confidence false person in frame 0: FP 15 of 30, ranked last
    std::vector<tml::FramePoses> g, p;
    for (std::uint64_t t = 0; t < 2; ++t) {
      g.push_back(frame(t, {person(10, ya, 0)}));
      std::vector<tml::Pose> poses{person(10, ya, 0)};
      if (t == 0) poses.push_back(person(10, yb, 1, 0.5));
      p.push_back(frame(t, poses));
    }
    out.push_back({"trailing false positive", sequence(g), sequence(p), 50.0, 100.0, 100.0});
  }
  {  // confident false person ranked first: P/R (0,0) (.5,.5) (1,2/3) -> AP 2/3
    std::vector<tml::FramePoses> g, p;
    for (std::uint64_t t = 0; t < 2; ++t) {
      g.push_back(frame(t, {person(10, ya, 0)}));
      std::vector<tml::Pose> poses{person(10, ya, 0, 0.9)};
      if (t == 0) poses.push_back(person(10, yb, 1, 1.0));
      p.push_back(frame(t, poses));
    }
    out.push_back({"leading false positive", sequence(g), sequence(p), 50.0, 100.0, 200.0 / 3.0});
  }
  {  // duplicate: the confident one is 1 px off and wins, the exact one is FP
    const auto g = sequence({frame(0, {person(10, ya, 0)})});
    const auto p = sequence({frame(0, {person(10, ya, 0, 0.8), person(10, ya, 1, 0.9, {1, 0})})});
    out.push_back({"duplicate detection", g, p, 0.0, 80.0, 100.0});
  }
  {  // frame 1 missing from prediction, extra frame 2 not in GT
    const auto g = sequence({frame(0, {person(10, ya, 0)}), frame(1, {person(10, ya, 0)})});
    const auto p = sequence({frame(0, {person(10, ya, 0)}), frame(2, {person(10, ya, 0, 0.5)})});
    out.push_back({"misaligned frames", g, p, 0.0, 100.0, 50.0});
  }
  {  // nothing predicted
    const auto g = sequence({frame(0, {person(10, ya, 0), person(10, yb, 1)}),
                             frame(1, {person(10, ya, 0), person(10, yb, 1)})});
    const auto p = sequence({frame(0, {}), frame(1, {})});
    out.push_back({"empty prediction", g, p, 0.0, std::nullopt, 0.0});
  }
  return out;
}

}  // namespace scenario
