#pragma once

// Run configuration: every pipeline parameter, loadable from a key = value
// file. Keys are "<section>.<field>", e.g. "score.alpha = 0.5". Unknown keys
// are rejected so typos cannot silently fall back to defaults.

#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "tml/encode.hpp"
#include "tml/error.hpp"
#include "tml/kv_config.hpp"
#include "tml/scoring.hpp"
#include "tml/stride_sampler.hpp"
#include "tml/synth.hpp"
#include "tml/tracker.hpp"

namespace tml {

inline ChannelLayout parse_layout(const std::string& s) {
  if (s == "individual") return ChannelLayout::Individual;
  if (s == "accumulated") return ChannelLayout::Accumulated;
  fail_validation("unknown channel layout '" + s + "' (individual|accumulated)");
}

inline std::string to_string(ChannelLayout l) {
  return l == ChannelLayout::Individual ? "individual" : "accumulated";
}

inline FlowMapKind parse_map_kind(const std::string& s) {
  if (s == "tml") return FlowMapKind::Limb;
  if (s == "jointflow") return FlowMapKind::Joint;
  fail_validation("unknown flow map kind '" + s + "' (tml|jointflow)");
}

inline std::string to_string(FlowMapKind k) { return k == FlowMapKind::Limb ? "tml" : "jointflow"; }

struct RunConfig {
  TrackerConfig tracker;  // holds the encoder and score settings
  StrideConfig stride;
  SceneConfig scene;

  void validate() const {
    tracker.validate();
    stride.validate();
    scene.validate();
  }
};

namespace detail {

inline std::size_t non_negative(const KeyValueConfig& c, const std::string& key) {
  const auto v = c.get_int(key);
  if (v < 0) fail_validation("config key '" + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

inline std::uint32_t pixels(const KeyValueConfig& c, const std::string& key) {
  const auto v = c.get_int(key);
  if (v < 0 || v > INT32_MAX) fail_validation("config key '" + key + "' out of range");
  return static_cast<std::uint32_t>(v);
}

inline std::uint64_t seed(const KeyValueConfig& c, const std::string& key) {
  return detail::parse_number<std::uint64_t>(c.get_string(key), key);
}

using Setter = std::function<void(RunConfig&, const KeyValueConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& run_config_setters() {
  static const std::map<std::string, Setter> setters = {
      {"encoder.parts_per_limb", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.encoder.parts_per_limb = non_negative(c, k); }},
      {"encoder.stroke_half_width", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.encoder.stroke_half_width = c.get_double(k); }},
      {"encoder.epsilon_motion", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.encoder.epsilon_motion = c.get_double(k); }},
      {"encoder.layout", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.encoder.layout = parse_layout(c.get_string(k)); }},
      {"encoder.grid_stride", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.encoder.grid_stride = non_negative(c, k); }},
      {"score.alpha", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.score.alpha = c.get_double(k); }},
      {"score.integral_samples", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.score.integral_samples = non_negative(c, k); }},
      {"score.distance_scale", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.score.distance_scale = c.get_double(k); }},
      {"score.epsilon_motion", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.score.epsilon_motion = c.get_double(k); }},
      {"score.bilinear", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.score.bilinear = c.get_bool(k); }},
      {"tracker.score_threshold", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.score_threshold = c.get_double(k); }},
      {"tracker.nms_radius", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.nms_radius = c.get_double(k); }},
      {"tracker.refine", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.refine = c.get_bool(k); }},
      {"tracker.map", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.tracker.map = parse_map_kind(c.get_string(k)); }},
      {"stride.max_stride", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.stride.max_stride = non_negative(c, k); }},
      {"stride.rng_seed", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.stride.rng_seed = seed(c, k); }},
      {"stride.scale_min", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.stride.scale_min = c.get_double(k); }},
      {"stride.scale_max", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.stride.scale_max = c.get_double(k); }},
      {"stride.rotation_range", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.stride.rotation_range = c.get_double(k); }},
      {"stride.crop_width", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.stride.crop_size.width = pixels(c, k); }},
      {"stride.crop_height", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.stride.crop_size.height = pixels(c, k); }},
      {"scene.people", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.people = non_negative(c, k); }},
      {"scene.frames", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.frames = non_negative(c, k); }},
      {"scene.width", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.image_size.width = pixels(c, k); }},
      {"scene.height", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.image_size.height = pixels(c, k); }},
      {"scene.motion", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.motion = parse_motion_preset(c.get_string(k)); }},
      {"scene.speed", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.speed = c.get_double(k); }},
      {"scene.jitter_sigma", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.jitter_sigma = c.get_double(k); }},
      {"scene.dropout_prob", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.dropout_prob = c.get_double(k); }},
      {"scene.seed", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.seed = seed(c, k); }},
      {"scene.figure_height", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.figure_height = c.get_double(k); }},
      {"scene.crossing_angle_deg", [](RunConfig& r, const KeyValueConfig& c, const std::string& k) { r.scene.crossing_angle_deg = c.get_double(k); }},
  };
  return setters;
}

}  // namespace detail

/// Keys understood by apply_config.
inline std::vector<std::string> run_config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::run_config_setters()) keys.push_back(k);
  return keys;
}

/// Overwrites the fields named in `c`; fields it does not mention keep their
/// current value. Applying the file first and the flags second gives flags
/// precedence.
inline void apply_config(RunConfig& run, const KeyValueConfig& c) {
  const auto& setters = detail::run_config_setters();
  for (const auto& [key, _] : c.entries()) {
    const auto it = setters.find(key);
    if (it == setters.end()) fail_validation("unknown config key '" + key + "'");
    it->second(run, c, key);
  }
}

inline RunConfig load_run_config(const std::string& path) {
  RunConfig run;
  apply_config(run, KeyValueConfig::load(path));
  run.validate();
  return run;
}

}  // namespace tml
