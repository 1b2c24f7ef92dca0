#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "tml/config.hpp"
#include "tml/io.hpp"
#include "tml/reports.hpp"

using namespace tml;

TEST(RunConfig, DefaultsValidate) {
  const RunConfig r;
  EXPECT_NO_THROW(r.validate());
  EXPECT_EQ(r.tracker.score.alpha, 0.5);
  EXPECT_EQ(r.tracker.score.integral_samples, 20u);
  EXPECT_EQ(r.tracker.encoder.parts_per_limb, 20u);
  EXPECT_EQ(r.stride.max_stride, 4u);
}

TEST(RunConfig, AppliesEveryKnownKey) {
  RunConfig r;
  apply_config(r, KeyValueConfig::parse(R"(
    # pipeline overrides
    encoder.parts_per_limb = 10
    encoder.stroke_half_width = 1.5
    encoder.layout = accumulated
    encoder.grid_stride = 2
    score.alpha = 0
    score.integral_samples = 40
    score.distance_scale = 16
    score.bilinear = true
    tracker.score_threshold = 0.2
    tracker.nms_radius = 0
    tracker.refine = false
    tracker.map = jointflow
    stride.max_stride = 2
    stride.rng_seed = 18446744073709551615
    stride.crop_width = 64
    scene.motion = crossing
    scene.people = 4
    scene.seed = 7
  )"));
  EXPECT_EQ(r.tracker.encoder.parts_per_limb, 10u);
  EXPECT_EQ(r.tracker.encoder.stroke_half_width, 1.5);
  EXPECT_EQ(r.tracker.encoder.layout, ChannelLayout::Accumulated);
  EXPECT_EQ(r.tracker.encoder.grid_stride, 2u);
  EXPECT_EQ(r.tracker.score.alpha, 0.0);
  EXPECT_EQ(r.tracker.score.integral_samples, 40u);
  EXPECT_EQ(r.tracker.score.distance_scale, 16.0);
  EXPECT_TRUE(r.tracker.score.bilinear);
  EXPECT_EQ(r.tracker.score_threshold, 0.2);
  EXPECT_EQ(r.tracker.nms_radius, 0.0);
  EXPECT_FALSE(r.tracker.refine);
  EXPECT_EQ(r.tracker.map, FlowMapKind::Joint);
  EXPECT_EQ(r.stride.max_stride, 2u);
  EXPECT_EQ(r.stride.rng_seed, 18446744073709551615ull);
  EXPECT_EQ(r.stride.crop_size.width, 64u);
  EXPECT_EQ(r.scene.motion, MotionPreset::Crossing);
  EXPECT_EQ(r.scene.people, 4u);
  EXPECT_EQ(r.scene.seed, 7u);
  EXPECT_NO_THROW(r.validate());
}

TEST(RunConfig, LaterLayerWins) {
  RunConfig r;
  apply_config(r, KeyValueConfig::parse("score.alpha = 0.25\nscene.people = 3\n"));
  apply_config(r, KeyValueConfig::parse("score.alpha = 0.75\n"));
  EXPECT_EQ(r.tracker.score.alpha, 0.75);
  EXPECT_EQ(r.scene.people, 3u);
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  RunConfig r;
  EXPECT_THROW(apply_config(r, KeyValueConfig::parse("score.alpah = 0.5")), Error);
  EXPECT_THROW(apply_config(r, KeyValueConfig::parse("score.alpha = half")), Error);
  EXPECT_THROW(apply_config(r, KeyValueConfig::parse("encoder.layout = stacked")), Error);
  EXPECT_THROW(apply_config(r, KeyValueConfig::parse("scene.people = -2")), Error);
  RunConfig bad;
  apply_config(bad, KeyValueConfig::parse("score.alpha = 2"));
  EXPECT_THROW(bad.validate(), Error);
}

TEST(RunConfig, EveryKeyIsListed) {
  const auto keys = run_config_keys();
  EXPECT_EQ(keys.size(), 32u);
  for (const auto& k : keys) EXPECT_NE(k.find('.'), std::string::npos) << k;
}

TEST(RunConfig, LoadFromFile) {
  const auto path = (std::filesystem::temp_directory_path() / "tml_run_config_test.cfg").string();
  {
    std::ofstream out(path);
    out << "score.alpha = 0.1\ntracker.refine = false\n";
  }
  const auto r = load_run_config(path);
  EXPECT_EQ(r.tracker.score.alpha, 0.1);
  EXPECT_FALSE(r.tracker.refine);
  std::filesystem::remove(path);
  try {
    load_run_config(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}

TEST(Names, LayoutAndMapKindRoundTrip) {
  for (auto l : {ChannelLayout::Individual, ChannelLayout::Accumulated}) EXPECT_EQ(parse_layout(to_string(l)), l);
  for (auto k : {FlowMapKind::Limb, FlowMapKind::Joint}) EXPECT_EQ(parse_map_kind(to_string(k)), k);
}

TEST(Reports, EvalTableHasGroupColumns) {
  Sequence gt;
  gt.topology = default_topology();
  const auto rep = evaluate(gt, gt);
  const auto table = format_eval_table(rep);
  for (const char* col : {"Head", "Shou", "Elb", "Wri", "Hip", "Knee", "Ankl", "Total", "MOTA", "mAP"})
    EXPECT_NE(table.find(col), std::string::npos) << col;
  const auto j = eval_report_to_json(rep, gt.topology);
  EXPECT_EQ(j["version"], "tml-eval-report/1");
  EXPECT_TRUE(j["total"]["mota"].is_null());
}
