// tml: command-line front end for synthetic scenes, flow-map encoding,
// tracking, evaluation and paired augmentation.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <deque>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <CLI11.hpp>
#include <json.hpp>

#include "tml/tml.hpp"

namespace fs = std::filesystem;
using tml::Error;
using tml::ErrorKind;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitValidation = 3;

[[noreturn]] void usage_error(const std::string& what) { throw Error(ErrorKind::Usage, what); }

// Runs fn(0..n-1) on up to `jobs` threads. Results land by index, so output
// order never depends on scheduling. The lowest-index failure is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Flags that mirror config keys. They are turned into key = value entries and
// applied after the config file, so a flag always beats the file.
class Overrides {
 public:
  explicit Overrides(CLI::App* app) : app_(app) {}

  CLI::Option* add(const std::string& flag, const std::string& key, const std::string& help) {
    auto& slot = values_.emplace_back();
    auto* opt = app_->add_option(flag, slot, help + " [" + key + "]");
    bound_.push_back({opt, key, &slot});
    return opt;
  }

  // Boolean switch pair, e.g. --refine / --no-refine.
  void add_switch(const std::string& name, const std::string& key, const std::string& help) {
    const std::string on_help = help + " [" + key + "]";
    const std::string off_help = "disable --" + name;
    auto* on = app_->add_flag("--" + name, on_help);
    auto* off = app_->add_flag("--no-" + name, off_help);
    on->excludes(off);
    switches_.push_back({on, off, key});
  }

  tml::RunConfig resolve(const std::string& config_path) const {
    tml::RunConfig run;
    if (!config_path.empty()) tml::apply_config(run, tml::KeyValueConfig::load(config_path));
    tml::KeyValueConfig flags;
    for (const auto& b : bound_)
      if (b.opt->count() > 0) flags.set(b.key, *b.value);
    for (const auto& s : switches_) {
      if (s.on->count() > 0) flags.set(s.key, "true");
      if (s.off->count() > 0) flags.set(s.key, "false");
    }
    tml::apply_config(run, flags);
    run.validate();
    return run;
  }

 private:
  struct Bound {
    CLI::Option* opt;
    std::string key;
    const std::string* value;
  };
  struct Switch {
    CLI::Option* on;
    CLI::Option* off;
    std::string key;
  };
  CLI::App* app_;
  std::deque<std::string> values_;
  std::vector<Bound> bound_;
  std::vector<Switch> switches_;
};

void add_tracker_overrides(Overrides& o) {
  o.add("--alpha", "score.alpha", "weight of the flow score; 0 keeps only the distance term");
  o.add("--layout", "encoder.layout", "individual|accumulated");
  o.add("--map", "tracker.map", "tml|jointflow");
  o.add("--parts", "encoder.parts_per_limb", "pieces per limb");
  o.add("--half-width", "encoder.stroke_half_width", "stroke half width, pixels");
  o.add("--grid-stride", "encoder.grid_stride", "pixels per flow-map cell");
  o.add("--samples", "score.integral_samples", "line-integral sample count");
  o.add("--distance-scale", "score.distance_scale", "distance score scale, pixels");
  o.add("--threshold", "tracker.score_threshold", "minimum association score");
  o.add("--nms-radius", "tracker.nms_radius", "joint NMS radius in pixels, 0 disables");
  o.add_switch("refine", "tracker.refine", "insert missing middle-frame poses");
  o.add_switch("bilinear", "score.bilinear", "bilinear flow lookup");
}

std::string default_sidecar(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  const auto stem = p.extension() == ".json" ? p.stem().string() : p.filename().string();
  return (p.parent_path() / (stem + suffix)).string();
}

const tml::FramePoses& frame_at(const tml::Sequence& seq, std::uint64_t index) {
  for (const auto& f : seq.frames)
    if (f.frame_index == index) return f;
  tml::fail_validation("no frame with frame_index " + std::to_string(index));
}

nlohmann::json vec_json(tml::Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config, out, gt;
};

void cmd_synth(const SynthArgs& a, const tml::RunConfig& run) {
  const auto scene = tml::generate_sequence(run.scene);
  const auto candidates = tml::apply_corruption(scene, run.scene);
  const auto gt = a.gt.empty() ? default_sidecar(a.out, ".gt.json") : a.gt;
  tml::write_annotations(candidates, a.out);
  tml::write_annotations(scene.ground_truth, gt);
  std::cout << "wrote " << a.out << " (" << candidates.frames.size() << " frames) and ground truth " << gt << "\n";
  if (scene.occlusion)
    std::cout << "occluded: track " << scene.occlusion->track_id << " at frame " << scene.occlusion->frame_index
              << "\n";
}

struct EncodeArgs {
  std::string config, in, out;
  std::uint64_t t1 = 0, t2 = 0;
};

void cmd_encode(const EncodeArgs& a, const tml::RunConfig& run) {
  if (a.t1 == a.t2) usage_error("--t1 and --t2 must name different frames");
  const auto seq = tml::read_annotations(a.in);
  const auto& earlier = frame_at(seq, a.t1);
  const auto& later = frame_at(seq, a.t2);
  const auto pairing = tml::pair_by_track_id(later, earlier);
  const auto grid = tml::encode_flow(run.tracker.map, later, earlier, pairing, seq.topology, run.tracker.encoder);
  tml::write_flowmap(grid, a.out);
  std::cout << "wrote " << a.out << ": " << grid.width() << "x" << grid.height() << ", " << grid.channel_count()
            << " channels, " << pairing.size() << " paired people\n";
}

struct TrackArgs {
  std::string config, flow_gt;
  std::vector<std::string> in, out, log;
  std::size_t jobs = 1;
};

void cmd_track(const TrackArgs& a, const tml::RunConfig& run) {
  if (a.in.size() != a.out.size()) usage_error("--in and --out need the same number of paths");
  if (!a.log.empty() && a.log.size() != a.in.size()) usage_error("--log needs one path per --in");
  std::optional<tml::Sequence> truth;
  if (!a.flow_gt.empty()) truth = tml::read_annotations(a.flow_gt);

  std::vector<std::size_t> inserted(a.in.size());
  parallel_for(a.in.size(), a.jobs, [&](std::size_t i) {
    const auto seq = tml::read_annotations(a.in[i]);
    const auto flow = truth ? tml::ground_truth_flow(*truth, run.tracker.encoder, run.tracker.map) : tml::no_flow();
    const auto result = tml::track_sequence(seq, run.tracker, flow);
    tml::write_annotations(result.sequence, a.out[i]);
    const auto log = a.log.empty() ? default_sidecar(a.out[i], ".refine.json") : a.log[i];
    tml::write_file(log, tml::canonical_json(tml::refinement_log_to_json(result.refinement_log)));
    inserted[i] = result.refinement_log.size();
  });
  for (std::size_t i = 0; i < a.in.size(); ++i)
    std::cout << a.in[i] << " -> " << a.out[i] << " (" << inserted[i] << " refined poses)\n";
}

struct EvalArgs {
  std::vector<std::string> gt, pred;
  std::string report;
  double factor = 0.5;
  std::size_t jobs = 1;
};

void cmd_eval(const EvalArgs& a) {
  if (a.gt.size() != a.pred.size()) usage_error("--gt and --pred need the same number of paths");
  std::vector<nlohmann::json> reports(a.gt.size());
  std::vector<std::string> tables(a.gt.size());
  parallel_for(a.gt.size(), a.jobs, [&](std::size_t i) {
    const auto gt = tml::read_annotations(a.gt[i]);
    const auto pred = tml::read_annotations(a.pred[i]);
    const auto rep = tml::evaluate(gt, pred, a.factor);
    tables[i] = tml::format_eval_table(rep);
    reports[i] = tml::eval_report_to_json(rep, gt.topology);
  });
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables.size() > 1) std::cout << (i ? "\n" : "") << a.pred[i] << "\n";
    std::cout << tables[i];
  }
  if (!a.report.empty()) {
    nlohmann::json doc;
    if (reports.size() == 1) {
      doc = reports[0];
    } else {
      doc = nlohmann::json::array();
      for (std::size_t i = 0; i < reports.size(); ++i)
        doc.push_back({{"gt", a.gt[i]}, {"pred", a.pred[i]}, {"report", reports[i]}});
    }
    tml::write_file(a.report, tml::canonical_json(doc));
  }
}

struct AugmentArgs {
  std::string config, in, out_dir;
  std::size_t count = 8, jobs = 1;
};

void cmd_augment(const AugmentArgs& a, const tml::RunConfig& run) {
  const auto seq = tml::read_annotations(a.in);
  if (seq.frames.size() < 2) tml::fail_validation(a.in + ": augmentation needs at least two frames");
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) tml::fail_io("cannot create directory '" + a.out_dir + "': " + ec.message());

  const auto& sc = run.stride;
  std::vector<nlohmann::json> entries(a.count);
  parallel_for(a.count, a.jobs, [&](std::size_t i) {
    const auto pair = tml::sample_frame_pair(seq.frames.size(), sc, i);
    const auto& first = seq.frames[pair.earlier];
    const auto& second = seq.frames[pair.later];
    const auto crop = tml::random_person_crop(first, second, sc, i);

    tml::Rng rng(sc.rng_seed, 12, i);
    tml::PairedTransform t;
    t.center = *tml::centroid(first.poses[crop.person]);
    t.scale = rng.uniform(sc.scale_min, sc.scale_max);
    t.rotation_deg = rng.uniform(-sc.rotation_range, sc.rotation_range);
    t.crop_origin = crop.origin;
    t.output_size = sc.crop_size;
    const auto [f1, f2] = tml::paired_transform(first, second, t);

    tml::Sequence sample;
    sample.topology = seq.topology;
    sample.frames = {f1, f2};
    char name[32];
    std::snprintf(name, sizeof name, "sample_%05zu.json", i);
    tml::write_annotations(sample, (fs::path(a.out_dir) / name).string());
    entries[i] = {{"sample", i},
                  {"file", name},
                  {"t1", first.frame_index},
                  {"t2", second.frame_index},
                  {"stride", pair.stride()},
                  {"person", crop.person},
                  {"center", vec_json(t.center)},
                  {"scale", t.scale},
                  {"rotation_deg", t.rotation_deg},
                  {"crop_origin", vec_json(t.crop_origin)},
                  {"centroid_offset", vec_json(crop.centroid_offset)},
                  {"output_size", {t.output_size.width, t.output_size.height}}};
  });
  nlohmann::json manifest = {{"source", a.in}, {"rng_seed", sc.rng_seed}, {"samples", entries}};
  const auto path = (fs::path(a.out_dir) / "manifest.json").string();
  tml::write_file(path, tml::canonical_json(manifest));
  std::cout << "wrote " << a.count << " samples and " << path << "\n";
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return kExitUsage;
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Validation: return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif

  CLI::App app{
      "Temporal flow maps for limbs: synthetic scenes, flow-map encoding, tracking and evaluation.\n"
      "Settings come from defaults, then --config FILE (key = value lines), then flags; flags win.\n"
      "Exit codes: 0 ok, 1 usage, 2 I/O, 3 validation."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tml 1.0");

  // synth
  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene: detector-like candidates plus ground truth");
  synth->footer("Errors: unknown preset or invalid scene parameter (3), unwritable output (2).");
  synth->add_option("--config", sa.config, "key = value config file")->check(CLI::ExistingFile);
  synth->add_option("-o,--out", sa.out, "candidate annotations (no track ids)")->required();
  synth->add_option("--gt", sa.gt, "ground-truth sidecar, default <out>.gt.json");
  Overrides synth_o(synth);
  synth_o.add("--preset", "scene.motion", "static|crossing|wander|occlusion-middle");
  synth_o.add("--seed", "scene.seed", "random seed");
  synth_o.add("--people", "scene.people", "number of people");
  synth_o.add("--frames", "scene.frames", "number of frames");
  synth_o.add("--width", "scene.width", "image width");
  synth_o.add("--height", "scene.height", "image height");
  synth_o.add("--speed", "scene.speed", "root displacement per frame, pixels");
  synth_o.add("--jitter", "scene.jitter_sigma", "joint noise sigma, pixels");
  synth_o.add("--dropout", "scene.dropout_prob", "probability of dropping a pose per frame");
  synth_o.add("--crossing-angle", "scene.crossing_angle_deg", "crossing path angle, degrees");

  // encode
  EncodeArgs ea;
  auto* encode = app.add_subcommand("encode", "encode the flow map between two annotated frames (paired by track id)");
  encode->footer("Errors: missing frame or bad annotation (3), unreadable input or unwritable output (2).");
  encode->add_option("--config", ea.config, "key = value config file")->check(CLI::ExistingFile);
  encode->add_option("-i,--in", ea.in, "annotations with track ids")->required();
  encode->add_option("--t1", ea.t1, "frame_index of the earlier frame")->required();
  encode->add_option("--t2", ea.t2, "frame_index of the later frame")->required();
  encode->add_option("-o,--out", ea.out, "TMLF output")->required();
  Overrides encode_o(encode);
  encode_o.add("--layout", "encoder.layout", "individual|accumulated");
  encode_o.add("--map", "tracker.map", "tml|jointflow");
  encode_o.add("--parts", "encoder.parts_per_limb", "pieces per limb");
  encode_o.add("--half-width", "encoder.stroke_half_width", "stroke half width, pixels");
  encode_o.add("--grid-stride", "encoder.grid_stride", "pixels per flow-map cell");

  // track
  TrackArgs ta;
  auto* track = app.add_subcommand("track", "link per-frame candidates into tracks");
  track->footer(
      "Without --flow-gt every flow score is 0, so only the distance term separates candidates.\n"
      "Errors: bad annotations or config (3), unreadable input or unwritable output (2).");
  track->add_option("--config", ta.config, "key = value config file")->check(CLI::ExistingFile);
  track->add_option("-i,--in", ta.in, "candidate annotations, one or more")->required();
  track->add_option("-o,--out", ta.out, "tracked annotations, one per --in")->required();
  track->add_option("--log", ta.log, "refinement logs, default <out>.refine.json");
  track->add_option("--flow-gt", ta.flow_gt, "ground truth used to encode the flow maps");
  track->add_option("-j,--jobs", ta.jobs, "sequences processed in parallel")->check(CLI::PositiveNumber);
  Overrides track_o(track);
  add_tracker_overrides(track_o);

  // eval
  EvalArgs va;
  auto* eval = app.add_subcommand("eval", "MOTA, MOTP and mAP of predictions against ground truth");
  eval->footer("Errors: bad annotations or mismatched skeletons (3), unreadable input or unwritable report (2).");
  eval->add_option("--gt", va.gt, "ground-truth annotations, one or more")->required();
  eval->add_option("--pred", va.pred, "predicted annotations, one per --gt")->required();
  eval->add_option("--report", va.report, "JSON report path");
  eval->add_option("--factor", va.factor, "PCKh threshold factor")->capture_default_str();
  eval->add_option("-j,--jobs", va.jobs, "sequences evaluated in parallel")->check(CLI::PositiveNumber);

  // augment
  AugmentArgs aa;
  auto* augment = app.add_subcommand("augment", "sample frame pairs and apply one shared transform to both frames");
  augment->footer("Errors: fewer than two frames or bad parameters (3), unreadable input or unwritable output (2).");
  augment->add_option("--config", aa.config, "key = value config file")->check(CLI::ExistingFile);
  augment->add_option("-i,--in", aa.in, "annotations")->required();
  augment->add_option("-o,--out-dir", aa.out_dir, "output directory")->required();
  augment->add_option("-n,--count", aa.count, "number of samples")->capture_default_str();
  augment->add_option("-j,--jobs", aa.jobs, "samples processed in parallel")->check(CLI::PositiveNumber);
  Overrides augment_o(augment);
  augment_o.add("--seed", "stride.rng_seed", "random seed");
  augment_o.add("--max-stride", "stride.max_stride", "largest frame distance");
  augment_o.add("--scale-min", "stride.scale_min", "smallest scale");
  augment_o.add("--scale-max", "stride.scale_max", "largest scale");
  augment_o.add("--rotation", "stride.rotation_range", "rotation range, degrees");
  augment_o.add("--crop-width", "stride.crop_width", "crop width");
  augment_o.add("--crop-height", "stride.crop_height", "crop height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth) cmd_synth(sa, synth_o.resolve(sa.config));
    if (*encode) cmd_encode(ea, encode_o.resolve(ea.config));
    if (*track) cmd_track(ta, track_o.resolve(ta.config));
    if (*eval) cmd_eval(va);
    if (*augment) cmd_augment(aa, augment_o.resolve(aa.config));
  } catch (const Error& e) {
    std::cerr << "tml: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "tml: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
