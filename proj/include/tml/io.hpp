#pragma once

// File formats.
//
// Annotations are JSON:
//   {"frames": [{"frame_index": n, "image_size": [w, h],
//                "poses": [{"joints": [{"confidence": c, "joint_index": j,
//                                       "visible": b, "x": x, "y": y}, ...],
//                           "track_id": id}]}],      // track_id optional
//    "topology": "posetrack15", "version": "tml-annotations/1"}
// Canonical form: keys sorted, joints ordered by joint_index, shortest
// round-trip decimals, two-space indent, trailing newline.
//
// Flow maps are TMLF binaries, all little-endian:
//   "TMLF" | u16 version (1) | u8 layout | u16 limb_count | u32 width |
//   u32 height | float32 planes, channel-major (x plane then y plane per
//   channel), rows top to bottom.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tml/error.hpp"
#include "tml/flow_map.hpp"
#include "tml/pose.hpp"
#include "tml/skeleton.hpp"

namespace tml {

inline constexpr const char* kAnnotationVersion = "tml-annotations/1";
inline constexpr std::uint16_t kFlowMapVersion = 1;
inline constexpr std::size_t kFlowMapHeaderSize = 17;

/// Topologies that annotation files may name.
class TopologyRegistry {
 public:
  TopologyRegistry() { add(default_topology()); }

  void add(SkeletonTopology t) {
    if (const auto v = validate_topology(t); !v.empty())
      fail_validation("invalid topology '" + t.name + "': " + v.front().message);
    auto name = t.name;
    topologies_[name] = std::move(t);
  }

  const SkeletonTopology& find(const std::string& name) const {
    const auto it = topologies_.find(name);
    if (it == topologies_.end()) fail_validation("unknown topology '" + name + "'");
    return it->second;
  }

 private:
  std::map<std::string, SkeletonTopology> topologies_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open '" + path + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail_io("error while reading '" + path + "'");
  return data;
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail_io("cannot open '" + path + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) fail_io("error while writing '" + path + "'");
}

/// Canonical text of a JSON value.
inline std::string canonical_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

class FieldReader {
 public:
  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    fail_validation("annotation field " + path + ": " + what);
  }

  static const nlohmann::json& member(const nlohmann::json& obj, const std::string& path,
                                      const std::string& key) {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing");
    return *it;
  }

  static double number(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "malformed number");
    return v.get<double>();
  }

  static std::uint64_t unsigned_int(const nlohmann::json& v, const std::string& path,
                                    std::uint64_t max = UINT64_MAX) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      fail(path, "expected a non-negative integer");
    const auto x = v.get<std::uint64_t>();
    if (x > max) fail(path, "value out of range");
    return x;
  }

  static const nlohmann::json& array(const nlohmann::json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }
};

}  // namespace detail

inline nlohmann::json annotations_to_json(const Sequence& seq) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : seq.frames) {
    nlohmann::json poses = nlohmann::json::array();
    for (const auto& p : f.poses) {
      nlohmann::json joints = nlohmann::json::array();
      for (std::size_t j = 0; j < p.joints.size(); ++j) {
        if (!p.joints[j]) continue;
        const auto& jc = *p.joints[j];
        joints.push_back({{"joint_index", j},
                          {"x", jc.x},
                          {"y", jc.y},
                          {"confidence", jc.confidence},
                          {"visible", jc.visible}});
      }
      nlohmann::json pose = {{"joints", std::move(joints)}};
      if (p.track_id) pose["track_id"] = *p.track_id;
      poses.push_back(std::move(pose));
    }
    frames.push_back({{"frame_index", f.frame_index},
                      {"image_size", {f.image_size.width, f.image_size.height}},
                      {"poses", std::move(poses)}});
  }
  return {{"version", kAnnotationVersion}, {"topology", seq.topology.name}, {"frames", std::move(frames)}};
}

inline std::string serialize_annotations(const Sequence& seq) {
  validate_sequence(seq);
  return canonical_json(annotations_to_json(seq));
}

/// Parses and validates an annotation document. Syntax errors name the line
/// and column; semantic errors name the offending field.
inline Sequence parse_annotations(const std::string& text,
                                  const TopologyRegistry& registry = TopologyRegistry{}) {
  using R = detail::FieldReader;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    fail_validation("annotation parse error at line " + std::to_string(line) + ", column " +
                    std::to_string(col) + ": malformed JSON");
  }

  const auto& version = R::member(doc, "$", "version");
  if (!version.is_string() || version.get<std::string>() != kAnnotationVersion)
    R::fail("$.version", std::string("unsupported version, expected ") + kAnnotationVersion);
  const auto& topo_name = R::member(doc, "$", "topology");
  if (!topo_name.is_string()) R::fail("$.topology", "expected a string");

  Sequence seq;
  seq.topology = registry.find(topo_name.get<std::string>());
  const std::size_t J = seq.topology.joint_count();

  const auto& frames = R::array(R::member(doc, "$", "frames"), "$.frames");
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const std::string fpath = "$.frames[" + std::to_string(fi) + "]";
    const auto& jf = frames[fi];
    FramePoses f;
    f.frame_index = R::unsigned_int(R::member(jf, fpath, "frame_index"), fpath + ".frame_index");
    const auto& size = R::array(R::member(jf, fpath, "image_size"), fpath + ".image_size");
    if (size.size() != 2) R::fail(fpath + ".image_size", "expected [width, height]");
    f.image_size.width = static_cast<std::uint32_t>(R::unsigned_int(size[0], fpath + ".image_size[0]", UINT32_MAX));
    f.image_size.height = static_cast<std::uint32_t>(R::unsigned_int(size[1], fpath + ".image_size[1]", UINT32_MAX));

    const auto& poses = R::array(R::member(jf, fpath, "poses"), fpath + ".poses");
    for (std::size_t pi = 0; pi < poses.size(); ++pi) {
      const std::string ppath = fpath + ".poses[" + std::to_string(pi) + "]";
      const auto& jp = poses[pi];
      Pose p(J);
      if (jp.is_object() && jp.contains("track_id"))
        p.track_id = static_cast<TrackId>(R::unsigned_int(jp["track_id"], ppath + ".track_id", UINT32_MAX));
      const auto& joints = R::array(R::member(jp, ppath, "joints"), ppath + ".joints");
      for (std::size_t ji = 0; ji < joints.size(); ++ji) {
        const std::string jpath = ppath + ".joints[" + std::to_string(ji) + "]";
        const auto& jj = joints[ji];
        const auto idx = R::unsigned_int(R::member(jj, jpath, "joint_index"), jpath + ".joint_index");
        if (idx >= J)
          R::fail(jpath + ".joint_index", "joint index out of range (" + std::to_string(idx) +
                                              " >= " + std::to_string(J) + ")");
        if (p.joints[idx]) R::fail(jpath + ".joint_index", "duplicate joint index");
        JointCandidate c;
        c.x = R::number(R::member(jj, jpath, "x"), jpath + ".x");
        c.y = R::number(R::member(jj, jpath, "y"), jpath + ".y");
        c.confidence = R::number(R::member(jj, jpath, "confidence"), jpath + ".confidence");
        const auto& vis = R::member(jj, jpath, "visible");
        if (!vis.is_boolean()) R::fail(jpath + ".visible", "expected true or false");
        c.visible = vis.get<bool>();
        p.joints[idx] = c;
      }
      f.poses.push_back(std::move(p));
    }
    seq.frames.push_back(std::move(f));
  }
  validate_sequence(seq);
  return seq;
}

inline Sequence read_annotations(const std::string& path,
                                 const TopologyRegistry& registry = TopologyRegistry{}) {
  const auto text = read_file(path);
  try {
    return parse_annotations(text, registry);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

inline void write_annotations(const Sequence& seq, const std::string& path) {
  write_file(path, serialize_annotations(seq));
}

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <class T>
T get_le(const std::string& in, std::size_t pos) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i));
  return v;
}

}  // namespace detail

/// TMLF bytes of a grid. Values are narrowed to float32; contributor counts
/// and the cell size are not stored.
inline std::string encode_flowmap(const FlowMapGrid& g) {
  if (g.source_channels() > UINT16_MAX) fail_validation("too many limb channels for TMLF");
  if (g.width() > UINT32_MAX || g.height() > UINT32_MAX) fail_validation("grid too large for TMLF");
  std::string out = "TMLF";
  detail::put_le<std::uint16_t>(out, kFlowMapVersion);
  detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(g.layout()));
  detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(g.source_channels()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.width()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.height()));
  out.reserve(out.size() + 4 * g.plane_count() * g.width() * g.height());
  for (std::size_t i = 0; i < g.plane_count(); ++i)
    for (const double v : g.plane(i))
      detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

inline FlowMapGrid decode_flowmap(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "TMLF") != 0) fail_validation("not a TMLF file");
  if (bytes.size() < kFlowMapHeaderSize) fail_validation("truncated TMLF header");
  const auto version = detail::get_le<std::uint16_t>(bytes, 4);
  if (version != kFlowMapVersion)
    fail_validation("unsupported TMLF version " + std::to_string(version));
  const auto layout_byte = detail::get_le<std::uint8_t>(bytes, 6);
  if (layout_byte > 1) fail_validation("invalid TMLF layout byte " + std::to_string(layout_byte));
  const auto limbs = detail::get_le<std::uint16_t>(bytes, 7);
  const auto width = detail::get_le<std::uint32_t>(bytes, 9);
  const auto height = detail::get_le<std::uint32_t>(bytes, 13);
  const auto layout = static_cast<ChannelLayout>(layout_byte);
  const std::size_t planes = layout == ChannelLayout::Accumulated ? 2 : 2 * std::size_t{limbs};
  const std::size_t cells = std::size_t{width} * height;
  const std::size_t expected = kFlowMapHeaderSize + 4 * planes * cells;
  if (bytes.size() < expected) fail_validation("truncated TMLF payload");
  if (bytes.size() > expected) fail_validation("trailing bytes after TMLF payload");

  FlowMapGrid g(width, height, layout, limbs);
  g.drop_contributor_counts();
  std::size_t pos = kFlowMapHeaderSize;
  for (std::size_t i = 0; i < planes; ++i)
    for (double& v : g.plane(i)) {
      v = std::bit_cast<float>(detail::get_le<std::uint32_t>(bytes, pos));
      pos += 4;
    }
  return g;
}

inline void write_flowmap(const FlowMapGrid& g, const std::string& path) {
  write_file(path, encode_flowmap(g));
}

inline FlowMapGrid read_flowmap(const std::string& path) {
  const auto bytes = read_file(path);
  try {
    return decode_flowmap(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace tml
