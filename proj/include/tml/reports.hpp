#pragma once

// JSON documents for the refinement log and evaluation reports, plus the
// plain-text evaluation table.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tml/io.hpp"
#include "tml/metrics.hpp"
#include "tml/tracker.hpp"

namespace tml {

inline nlohmann::json refinement_log_to_json(const std::vector<RefinementEntry>& log) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : log)
    entries.push_back({{"frame_index", e.frame_index}, {"track_id", e.track_id}, {"source", e.source}});
  return {{"version", "tml-refinement-log/1"}, {"entries", std::move(entries)}};
}

inline std::vector<RefinementEntry> refinement_log_from_json(const nlohmann::json& doc) {
  std::vector<RefinementEntry> out;
  try {
    for (const auto& e : doc.at("entries"))
      out.push_back({e.at("frame_index").get<std::uint64_t>(), e.at("track_id").get<TrackId>(),
                     e.at("source").get<std::string>()});
  } catch (const nlohmann::json::exception& ex) {
    fail_validation(std::string("malformed refinement log: ") + ex.what());
  }
  return out;
}

namespace detail {
inline nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json counts_to_json(const MotCounts& c) {
  return {{"gt", c.gt}, {"matches", c.matches}, {"fn", c.fn}, {"fp", c.fp}, {"idsw", c.idsw}};
}
}  // namespace detail

/// Machine-readable evaluation report; absent values are null.
inline nlohmann::json eval_report_to_json(const EvalReport& r, const SkeletonTopology& topo) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : r.groups)
    groups.push_back({{"name", g.name},
                      {"mota", detail::optional_number(g.mota)},
                      {"ap", detail::optional_number(g.ap)},
                      {"counts", detail::counts_to_json(g.counts)}});
  nlohmann::json joints = nlohmann::json::array();
  for (std::size_t j = 0; j < r.joint_counts.size(); ++j)
    joints.push_back({{"joint", j < topo.joint_names.size() ? topo.joint_names[j] : std::to_string(j)},
                      {"mota", detail::optional_number(r.joint_counts[j].mota())},
                      {"ap", detail::optional_number(r.joint_ap[j])},
                      {"counts", detail::counts_to_json(r.joint_counts[j])}});
  return {{"version", "tml-eval-report/1"},
          {"pckh_factor", r.thresh_factor},
          {"total", {{"mota", detail::optional_number(r.total_mota)},
                     {"motp", detail::optional_number(r.motp)},
                     {"map", detail::optional_number(r.mean_ap)},
                     {"counts", detail::counts_to_json(r.total)}}},
          {"groups", std::move(groups)},
          {"joints", std::move(joints)},
          {"notes", r.notes}};
}

/// Two-row table (MOTA, mAP) over the topology's joint groups plus Total;
/// the AP row's Total column is the mAP.
inline std::string format_eval_table(const EvalReport& r) {
  auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (v)
      std::snprintf(buf, sizeof buf, "%8.1f", *v);
    else
      std::snprintf(buf, sizeof buf, "%8s", "-");
    return std::string(buf);
  };
  auto head = [](const std::string& s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%8s", s.substr(0, 8).c_str());
    return std::string(buf);
  };
  std::string out = "      ";
  for (const auto& g : r.groups) out += head(g.name);
  out += head("Total") + "\nMOTA  ";
  for (const auto& g : r.groups) out += cell(g.mota);
  out += cell(r.total_mota) + "\nmAP   ";
  for (const auto& g : r.groups) out += cell(g.ap);
  out += cell(r.mean_ap) + "\nMOTP  " + cell(r.motp) + "\n";
  char counts[160];
  std::snprintf(counts, sizeof counts, "GT %zu  FN %zu  FP %zu  IDSW %zu\n", r.total.gt, r.total.fn,
                r.total.fp, r.total.idsw);
  out += counts;
  return out;
}

}  // namespace tml
