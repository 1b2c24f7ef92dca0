#include <gtest/gtest.h>

#include <cmath>

#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "tml/encode.hpp"
#include "tml/random.hpp"

using namespace tml;

namespace {

const SkeletonTopology kTopo = default_topology();

FramePoses frame(std::uint64_t index, std::uint32_t w = 40, std::uint32_t h = 40) {
  FramePoses f;
  f.frame_index = index;
  f.image_size = {w, h};
  return f;
}

Pose joints_at(std::initializer_list<std::pair<std::size_t, Vec2>> js) {
  Pose p(15);
  for (const auto& [j, v] : js) p.joints[j] = JointCandidate{v.x, v.y, 1.0, true};
  return p;
}

// Compares a grid against the brute-force recomputation cell by cell.
void expect_matches_oracle(const FlowMapGrid& g, const gen::FramePair& fp,
                           const std::vector<PosePairing>& pairing, const EncoderConfig& cfg,
                           double tol) {
  const auto strokes = oracle::limb_strokes(fp.later, fp.earlier, pairing, kTopo, cfg.parts_per_limb,
                                            cfg.epsilon_motion);
  const auto ref = oracle::brute_force_grid(strokes, kTopo.limb_count(), g.width(), g.height(),
                                            cfg.grid_stride, cfg.stroke_half_width);
  for (std::size_t c = 0; c < g.channel_count(); ++c)
    for (std::size_t y = 0; y < g.height(); ++y)
      for (std::size_t x = 0; x < g.width(); ++x) {
        const auto& r = ref[c][y][x];
        ASSERT_NEAR(g.at(c, x, y).x, r.x, tol) << c << " " << x << " " << y;
        ASSERT_NEAR(g.at(c, x, y).y, r.y, tol) << c << " " << x << " " << y;
        ASSERT_EQ(g.contributors(c, x, y), r.count);
      }
}

}  // namespace

TEST(Subdivide, MidpointsOfHalves) {
  EXPECT_EQ(subdivide_limb({0, 0}, {0, 4}, 2), (std::vector<Vec2>{{0, 1}, {0, 3}}));
  EXPECT_EQ(subdivide_limb({0, 0}, {6, 0}, 1), (std::vector<Vec2>{{3, 0}}));
  const auto a = subdivide_limb({0, 0}, {0, 20}, 20);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_DOUBLE_EQ(a[i].x, 0.0);
    EXPECT_DOUBLE_EQ(a[i].y, 0.5 + static_cast<double>(i));
  }
}

TEST(PartUnitVector, Examples) {
  EXPECT_EQ(part_unit_vector({2, 0}, {0, 0}, 1e-6), (Vec2{1, 0}));
  EXPECT_EQ(part_unit_vector({1, 1}, {1, 1}, 1e-6), (Vec2{0, 0}));
  const Vec2 v = part_unit_vector({3, 4}, {0, 0}, 1e-6);
  EXPECT_NEAR(v.x, 0.6, 1e-15);
  EXPECT_NEAR(v.y, 0.8, 1e-15);
  EXPECT_EQ(part_unit_vector({1e-7, 0}, {0, 0}, 1e-6), (Vec2{0, 0}));
}

TEST(Rasterize, HorizontalSegmentCoversOneRow) {
  FlowAccumulator acc(12, 12, 1);
  acc.add_stroke(0, {1, 5}, {8, 5}, {1, 0}, 1.0);
  const auto g = std::move(acc).finish();
  for (std::size_t y = 0; y < 12; ++y)
    for (std::size_t x = 0; x < 12; ++x) {
      const bool expected = y == 5 && x >= 1 && x <= 8;
      EXPECT_EQ(g.at(0, x, y), (expected ? Vec2{1, 0} : Vec2{0, 0})) << x << "," << y;
      EXPECT_EQ(g.contributors(0, x, y), expected ? 1u : 0u);
    }
}

TEST(Rasterize, ZeroLengthSegmentIsADisc) {
  FlowAccumulator acc(10, 10, 1);
  acc.add_stroke(0, {4.2, 4.6}, {4.2, 4.6}, {0, 1}, 1.5);
  const auto g = acc.finish();
  for (std::size_t y = 0; y < 10; ++y)
    for (std::size_t x = 0; x < 10; ++x) {
      const bool inside = std::hypot(x - 4.2, y - 4.6) < 1.5;
      EXPECT_EQ(!g.at(0, x, y).x && !g.at(0, x, y).y, !inside);
    }
}

TEST(Rasterize, SegmentOutsideGridLeavesItUnchanged) {
  FlowAccumulator acc(10, 10, 2);
  acc.add_stroke(1, {-30, -30}, {-20, -25}, {1, 0}, 2.0);
  acc.add_stroke(0, {50, 3}, {60, 3}, {1, 0}, 2.0);
  EXPECT_TRUE(acc.finish().is_zero());
}

TEST(Rasterize, PartiallyOutsideSegmentIsClipped) {
  FlowAccumulator acc(10, 10, 1);
  acc.add_stroke(0, {-5, 2}, {3, 2}, {1, 0}, 1.0);
  const auto g = acc.finish();
  for (std::size_t x = 0; x < 10; ++x) EXPECT_EQ(g.at(0, x, 2).x, x <= 3 ? 1.0 : 0.0);
}

TEST(EncodeTml, SingleMovingLimbMatchesUnionOfStrokes) {
  auto e = frame(0), l = frame(1);
  e.poses.push_back(joints_at({{7, {10, 10}}, {6, {10, 22}}}));  // right lower arm
  l.poses.push_back(joints_at({{7, {14, 11}}, {6, {16, 23}}}));
  const std::vector<PosePairing> pairing{{0, 0}};
  EncoderConfig cfg;
  const auto g = encode_tml(l, e, pairing, kTopo, cfg);
  ASSERT_EQ(g.plane_count(), 2 * kTopo.limb_count());
  expect_matches_oracle(g, {l, e}, pairing, cfg, 1e-12);
  std::size_t nonzero = 0;
  for (std::size_t c = 0; c < g.channel_count(); ++c)
    for (std::size_t y = 0; y < g.height(); ++y)
      for (std::size_t x = 0; x < g.width(); ++x) {
        const Vec2 v = g.at(c, x, y);
        EXPECT_LE(norm(v), 1.0 + 1e-12);
        if (v.x || v.y) {
          ++nonzero;
          EXPECT_EQ(c, 4u);
        }
      }
  EXPECT_GT(nonzero, 0u);
}

TEST(EncodeTml, OpposingOverlapAveragesToZero) {
  auto e = frame(0), l = frame(1);
  // Two people whose right shins sweep the same cells in opposite directions.
  e.poses.push_back(joints_at({{1, {10, 10}}, {0, {10, 20}}}));
  l.poses.push_back(joints_at({{1, {14, 10}}, {0, {14, 20}}}));
  e.poses.push_back(joints_at({{1, {14, 10}}, {0, {14, 20}}}));
  l.poses.push_back(joints_at({{1, {10, 10}}, {0, {10, 20}}}));
  const std::vector<PosePairing> pairing{{0, 0}, {1, 1}};
  const auto g = encode_tml(l, e, pairing, kTopo, EncoderConfig{});
  std::size_t overlap = 0;
  for (std::size_t y = 0; y < g.height(); ++y)
    for (std::size_t x = 0; x < g.width(); ++x)
      if (g.contributors(10, x, y) > 0) {
        ++overlap;
        EXPECT_EQ(g.at(10, x, y), (Vec2{0, 0}));
      }
  EXPECT_GT(overlap, 0u);
}

TEST(EncodeTml, IdenticalFramesEncodeZero) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    auto fp = gen::random_pair(rng, kTopo, 3, 60, 50, 6, true);
    std::vector<PosePairing> pairing{{0, 0}, {1, 1}, {2, 2}};
    EXPECT_TRUE(encode_tml(fp.earlier, fp.earlier, pairing, kTopo, EncoderConfig{}).is_zero());
  }
}

TEST(EncodeTml, EmptyPairingIsZeroGrid) {
  const auto g = encode_tml(frame(1), frame(0), {}, kTopo, EncoderConfig{});
  EXPECT_EQ(g.width(), 40u);
  EXPECT_TRUE(g.is_zero());
}

TEST(EncodeTml, RejectsMismatchedFrames) {
  auto l = frame(1, 40, 40), e = frame(0, 41, 40);
  EXPECT_THROW(encode_tml(l, e, {}, kTopo, EncoderConfig{}), Error);
  const std::vector<PosePairing> bad{{0, 0}};
  EXPECT_THROW(encode_tml(frame(1), frame(0), bad, kTopo, EncoderConfig{}), Error);
  EncoderConfig cfg;
  cfg.parts_per_limb = 0;
  EXPECT_THROW(encode_tml(frame(1), frame(0), {}, kTopo, cfg), Error);
}

// Property: random multi-person pairs equal the brute-force recomputation.
TEST(EncodeTml, MatchesBruteForceOracle) {
  Rng rng(11);
  for (int i = 0; i < 25; ++i) {
    auto fp = gen::random_pair(rng, kTopo, 1 + rng.index(3), 48, 40, 8, rng.index(2) == 1);
    std::vector<PosePairing> pairing;
    for (std::size_t k = 0; k < fp.later.poses.size(); ++k) pairing.push_back({k, k});
    EncoderConfig cfg;
    cfg.parts_per_limb = 1 + rng.index(20);
    cfg.stroke_half_width = rng.uniform(0.5, 2.5);
    cfg.grid_stride = 1 + rng.index(3);
    const auto g = encode_tml(fp.later, fp.earlier, pairing, kTopo, cfg);
    expect_matches_oracle(g, fp, pairing, cfg, 1e-9);
  }
}

TEST(EncodeTml, NormBoundAndCountInvariants) {
  Rng rng(12);
  for (int i = 0; i < 30; ++i) {
    auto fp = gen::random_pair(rng, kTopo, 4, 50, 50, 10, true);
    std::vector<PosePairing> pairing{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    const auto g = encode_tml(fp.later, fp.earlier, pairing, kTopo, EncoderConfig{});
    for (std::size_t c = 0; c < g.channel_count(); ++c)
      for (std::size_t y = 0; y < g.height(); ++y)
        for (std::size_t x = 0; x < g.width(); ++x) {
          const Vec2 v = g.at(c, x, y);
          const auto n = g.contributors(c, x, y);
          EXPECT_LE(norm(v), 1.0 + 1e-9);
          if (n == 0) {
            EXPECT_EQ(v, (Vec2{0, 0}));
          }
          if (n == 1) {
            EXPECT_NEAR(norm(v), 1.0, 1e-12);
          }
        }
  }
}

TEST(EncodeTml, FlipAntisymmetry) {
  Rng rng(13);
  for (int i = 0; i < 30; ++i) {
    auto fp = gen::random_pair(rng, kTopo, 3, 50, 50, 10, true);
    std::vector<PosePairing> pairing{{0, 0}, {1, 1}, {2, 2}};
    EncoderConfig cfg;
    cfg.layout = rng.index(2) ? ChannelLayout::Accumulated : ChannelLayout::Individual;
    const auto ab = encode_tml(fp.later, fp.earlier, pairing, kTopo, cfg);
    const auto ba = encode_tml(fp.earlier, fp.later, pairing, kTopo, cfg);
    for (std::size_t p = 0; p < ab.plane_count(); ++p)
      for (std::size_t k = 0; k < ab.plane(p).size(); ++k)
        ASSERT_EQ(ab.plane(p)[k], -ba.plane(p)[k]);
  }
}

TEST(EncodeTml, IntegerTranslationShiftsSupport) {
  Rng rng(14);
  for (int i = 0; i < 15; ++i) {
    auto fp = gen::random_pair(rng, kTopo, 2, 60, 60, 6, false);
    const int dx = static_cast<int>(rng.index(7)) - 3, dy = static_cast<int>(rng.index(7)) - 3;
    auto shifted = fp;
    for (auto* f : {&shifted.later, &shifted.earlier})
      for (auto& p : f->poses)
        for (auto& j : p.joints) {
          j->x += dx;
          j->y += dy;
        }
    std::vector<PosePairing> pairing{{0, 0}, {1, 1}};
    const auto g = encode_tml(fp.later, fp.earlier, pairing, kTopo, EncoderConfig{});
    const auto h = encode_tml(shifted.later, shifted.earlier, pairing, kTopo, EncoderConfig{});
    for (std::size_t c = 0; c < g.channel_count(); ++c)
      for (std::size_t y = 0; y < g.height(); ++y)
        for (std::size_t x = 0; x < g.width(); ++x) {
          const auto tx = static_cast<std::ptrdiff_t>(x) + dx, ty = static_cast<std::ptrdiff_t>(y) + dy;
          if (!h.contains(tx, ty)) continue;
          const bool a = g.contributors(c, x, y) > 0;
          const bool b = h.contributors(c, static_cast<std::size_t>(tx), static_cast<std::size_t>(ty)) > 0;
          ASSERT_EQ(a, b);
        }
  }
}

TEST(EncodeTml, PairDependsOnlyOnItsTwoFrames) {
  Rng rng(15);
  auto fp = gen::random_pair(rng, kTopo, 2, 50, 50, 6, false);
  std::vector<PosePairing> pairing{{0, 0}, {1, 1}};
  const auto a = encode_tml(fp.later, fp.earlier, pairing, kTopo, EncoderConfig{});
  auto other = gen::random_pair(rng, kTopo, 2, 50, 50, 6, false);  // unrelated frames in between
  (void)encode_tml(other.later, other.earlier, pairing, kTopo, EncoderConfig{});
  EXPECT_EQ(a, encode_tml(fp.later, fp.earlier, pairing, kTopo, EncoderConfig{}));
}

TEST(AccumulateChannels, SingleChannelCarriesOver) {
  auto e = frame(0), l = frame(1);
  e.poses.push_back(joints_at({{7, {10, 10}}, {6, {10, 22}}}));
  l.poses.push_back(joints_at({{7, {14, 11}}, {6, {16, 23}}}));
  const std::vector<PosePairing> pairing{{0, 0}};
  const auto g = encode_tml(l, e, pairing, kTopo, EncoderConfig{});
  const auto acc = accumulate_channels(g);
  EXPECT_EQ(acc.layout(), ChannelLayout::Accumulated);
  EXPECT_EQ(acc.plane_count(), 2u);
  for (std::size_t y = 0; y < g.height(); ++y)
    for (std::size_t x = 0; x < g.width(); ++x) EXPECT_EQ(acc.at(0, x, y), g.at(4, x, y));
}

TEST(AccumulateChannels, OpposingLimbsCancel) {
  FlowMapGrid g(3, 3, ChannelLayout::Individual, 2);
  g.set(0, 1, 1, {1, 0});
  g.set_contributors(0, 1, 1, 1);
  g.set(1, 1, 1, {-1, 0});
  g.set_contributors(1, 1, 1, 1);
  g.set(1, 0, 0, {0, 0.5});
  g.set_contributors(1, 0, 0, 2);
  const auto a = accumulate_channels(g);
  EXPECT_EQ(a.at(0, 1, 1), (Vec2{0, 0}));
  EXPECT_EQ(a.contributors(0, 1, 1), 2u);
  EXPECT_EQ(a.at(0, 0, 0), (Vec2{0, 0.5}));
}

TEST(AccumulateChannels, EmptyGridStaysEmpty) {
  const FlowMapGrid g(0, 0, ChannelLayout::Individual, 14);
  const auto a = accumulate_channels(g);
  EXPECT_EQ(a.width(), 0u);
  EXPECT_TRUE(a.is_zero());
  EXPECT_THROW(accumulate_channels(a), Error);
}

TEST(AccumulateChannels, LayoutOptionMatchesPostProcessing) {
  Rng rng(16);
  auto fp = gen::random_pair(rng, kTopo, 3, 50, 50, 8, true);
  std::vector<PosePairing> pairing{{0, 0}, {1, 1}, {2, 2}};
  EncoderConfig cfg;
  const auto ind = encode_tml(fp.later, fp.earlier, pairing, kTopo, cfg);
  cfg.layout = ChannelLayout::Accumulated;
  EXPECT_EQ(encode_tml(fp.later, fp.earlier, pairing, kTopo, cfg), accumulate_channels(ind));
}

TEST(JointFlow, SingleJointStroke) {
  auto e = frame(0), l = frame(1);
  e.poses.push_back(joints_at({{3, {5, 5}}}));
  l.poses.push_back(joints_at({{3, {9, 5}}}));
  const std::vector<PosePairing> pairing{{0, 0}};
  const auto g = encode_jointflow(l, e, pairing, kTopo, EncoderConfig{});
  EXPECT_EQ(g.channel_count(), 15u);
  for (std::size_t x = 0; x < g.width(); ++x)
    EXPECT_EQ(g.at(3, x, 5), ((x >= 5 && x <= 9) ? Vec2{1, 0} : Vec2{0, 0}));
}

TEST(JointFlow, StaticJointEncodesZero) {
  auto e = frame(0), l = frame(1);
  e.poses.push_back(joints_at({{3, {5, 5}}, {4, {7, 9}}}));
  l.poses = e.poses;
  const std::vector<PosePairing> pairing{{0, 0}};
  EXPECT_TRUE(encode_jointflow(l, e, pairing, kTopo, EncoderConfig{}).is_zero());
}

TEST(JointFlow, EqualsLimbEncodingOfZeroLengthLimbs) {
  SkeletonTopology degenerate = kTopo;
  degenerate.limbs.clear();
  for (std::size_t j = 0; j < kTopo.joint_count(); ++j) degenerate.limbs.push_back({j, j});
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    auto fp = gen::random_pair(rng, kTopo, 3, 50, 50, 8, true);
    std::vector<PosePairing> pairing{{0, 0}, {1, 1}, {2, 2}};
    EncoderConfig cfg;
    cfg.parts_per_limb = 1;
    EXPECT_EQ(encode_jointflow(fp.later, fp.earlier, pairing, kTopo, cfg),
              encode_tml(fp.later, fp.earlier, pairing, degenerate, cfg));
  }
}

TEST(PairByTrackId, MatchesIds) {
  auto e = frame(0), l = frame(1);
  for (TrackId id : {3u, 1u, 2u}) {
    Pose p(15);
    p.track_id = id;
    e.poses.push_back(p);
  }
  for (TrackId id : {2u, 5u, 3u}) {
    Pose p(15);
    p.track_id = id;
    l.poses.push_back(p);
  }
  EXPECT_EQ(pair_by_track_id(l, e), (std::vector<PosePairing>{{0, 2}, {2, 0}}));
}
