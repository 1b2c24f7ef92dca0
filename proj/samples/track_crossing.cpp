// Two people walk through each other. Tracks the noisy detections with and
// without the flow term and prints the resulting MOTA and ID switches.
//
//   track_crossing [seed]

#include <cstdio>
#include <cstdlib>

#include "tml/tml.hpp"

int main(int argc, char** argv) {
  tml::SceneConfig scene_cfg;
  scene_cfg.motion = tml::MotionPreset::Crossing;
  scene_cfg.people = 2;
  scene_cfg.frames = 6;
  scene_cfg.speed = 24.0;
  scene_cfg.jitter_sigma = 2.0;
  scene_cfg.seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;

  const auto scene = tml::generate_sequence(scene_cfg);
  const auto detections = tml::apply_corruption(scene, scene_cfg);

  for (double alpha : {0.5, 0.0}) {
    tml::TrackerConfig cfg;
    cfg.nms_radius = 0.0;  // crossing limbs overlap; keep every joint
    cfg.score.alpha = alpha;
    const auto tracked =
        tml::track_sequence(detections, cfg, tml::ground_truth_flow(scene.ground_truth, cfg.encoder));
    const auto report = tml::evaluate(scene.ground_truth, tracked.sequence);
    std::printf("alpha %.1f: MOTA %6.2f, ID switches %zu\n", alpha, report.total_mota.value_or(0.0),
                report.total.idsw);
  }
}
