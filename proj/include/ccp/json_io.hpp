#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ccp/analytics.hpp"
#include "ccp/classifier.hpp"
#include "ccp/estimator.hpp"
#include "ccp/ingestion.hpp"
#include "ccp/stats.hpp"
#include "json.hpp"

namespace ccp {

using nlohmann::json;

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline void to_json(json& j, const ModelPerformance& p) {
  j = {{"recall", p.recall}, {"fpr", p.fpr}, {"model_id", p.model_id}};
}

inline void to_json(json& j, const CcpEstimate& e) {
  j = {{"n", e.n},
       {"k", e.k},
       {"hit_rate", e.hit_rate},
       {"ccp_raw", e.ccp_raw},
       {"status", std::string(to_string(e.status))}};
}

inline void to_json(json& j, const ConfusionMatrix& cm) {
  j = {{"tp", cm.tp},
       {"fn", cm.fn},
       {"fp", cm.fp},
       {"tn", cm.tn},
       {"total", cm.total()},
       {"accuracy", opt(cm.accuracy())},
       {"precision", opt(cm.precision())},
       {"recall", opt(cm.recall())},
       {"fpr", opt(cm.fpr())},
       {"hit_rate", opt(cm.hit_rate())},
       {"positive_rate", opt(cm.positive_rate())},
       {"precision_lift", opt(cm.precision_lift())}};
}

inline void to_json(json& j, const BootstrapReport& r) {
  j = {{"iterations", r.iterations},
       {"seed", r.seed},
       {"coverage", r.coverage},
       {"sample_size", r.sample_size},
       {"perf", r.perf},
       {"differences",
        {{"mean", r.differences.mean},
         {"lower", r.differences.lower},
         {"upper", r.differences.upper},
         {"min", r.differences.min},
         {"max", r.differences.max}}}};
}

inline void to_json(json& j, const SensitivityReport& r) {
  json segs = json::array();
  for (const auto& s : r.segments) {
    segs.push_back({{"lower", s.segment.lower},
                    {"upper", s.segment.upper},
                    {"max_abs", s.max_abs},
                    {"p95_abs", s.p95_abs},
                    {"mean_abs", s.mean_abs}});
  }
  j = {{"iterations", r.iterations},
       {"seed", r.seed},
       {"sample_size", r.sample_size},
       {"redraws", r.redraws},
       {"segments", segs}};
}

inline void to_json(json& j, const Band& b) {
  j = {{"lower_percentile", b.lower}, {"upper_percentile", b.upper}, {"label", b.label}};
}

inline void to_json(json& j, const ProjectYearStats& s) {
  j = {{"repo_id", s.repo_id},
       {"year", s.year},
       {"first_year", s.first_year},
       {"n_commits", s.n_commits},
       {"n_non_merge_commits", s.n_non_merge_commits},
       {"k_hits", s.k_hits},
       {"ccp", s.ccp},
       {"coupling", opt(s.coupling)},
       {"coupling_per_file", opt(s.coupling_per_file)},
       {"speed", opt(s.speed)},
       {"retention", opt(s.retention)},
       {"retention_involved", opt(s.retention_involved)},
       {"onboarding", opt(s.onboarding)},
       {"dominant_language", opt(s.dominant_language)},
       {"avg_file_kb", opt(s.avg_file_kb)},
       {"n_authors", s.n_authors},
       {"n_involved", s.n_involved}};
}

inline void to_json(json& j, const Exclusion& e) {
  j = {{"repo_id", e.repo_id}, {"rule", std::string(to_string(e.rule))}, {"detail", e.detail}};
}

inline void to_json(json& j, const GroupSummary& g) {
  j = {{"group", g.group}, {"n", g.n}, {"mean_ccp", opt(g.mean_ccp)}, {"lift", opt(g.lift)}};
}

inline void to_json(json& j, const TermGroupRow& r) {
  j = {{"group", r.group},
       {"n_commits", r.n_commits},
       {"term_commits", r.term_commits},
       {"has_term", r.has_term},
       {"ccp", r.ccp}};
}

inline void to_json(json& j, const QualityTermReport& r) {
  j = {{"term", r.term}, {"files", r.files}, {"projects", r.projects}};
}

inline void to_json(json& j, const StabilityReport& r) {
  j = {{"n_pairs", r.n_pairs},
       {"pearson", opt(r.pearson)},
       {"mean_delta", r.mean_delta},
       {"mean_abs_delta", r.mean_abs_delta}};
}

inline void to_json(json& j, const CoChangeReport& r) {
  j = {{"n_pairs", r.n_pairs},
       {"n_improved_i", r.n_improved_i},
       {"n_improved_j", r.n_improved_j},
       {"n_improved_both", r.n_improved_both},
       {"match_rate", r.match_rate},
       {"precision", opt(r.precision)},
       {"base_rate", r.base_rate},
       {"lift", opt(r.lift)},
       {"thresholds", {{"delta_i", r.delta_i}, {"delta_j", r.delta_j}}}};
}

inline void to_json(json& j, const TwinReport& r) {
  j = {{"n_developer_pairs", r.n_developer_pairs},
       {"n_developer_better", r.n_developer_better},
       {"precision", r.precision},
       {"base_rate", opt(r.base_rate)},
       {"lift", opt(r.lift)},
       {"thresholds", {{"delta_project", r.delta_project}, {"delta_dev", r.delta_dev}}}};
}

namespace detail {

inline void flatten_into(const json& j, const std::string& prefix,
                         std::vector<std::pair<std::string, json>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      flatten_into(v, prefix.empty() ? k : prefix + "." + k, out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten_into(j[i], prefix + "." + std::to_string(i), out);
    }
  } else {
    out.emplace_back(prefix, j);
  }
}

inline std::string csv_cell(const json& v) {
  std::string s;
  if (v.is_null()) return s;
  if (v.is_string()) {
    s = v.get<std::string>();
  } else {
    s = v.dump();
  }
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  }
  return s;
}

}  // namespace detail

/// Dotted-path flattening of nested objects and arrays.
inline std::vector<std::pair<std::string, json>> flatten(const json& j) {
  std::vector<std::pair<std::string, json>> out;
  detail::flatten_into(j, "", out);
  return out;
}

/// Rows of objects as CSV; the header comes from the first row's flattened keys.
inline std::string to_csv_rows(const std::vector<json>& rows) {
  std::ostringstream os;
  if (rows.empty()) return {};
  const auto header = flatten(rows.front());
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i].first;
  os << "\n";
  for (const auto& row : rows) {
    const auto cells = flatten(row);
    for (std::size_t i = 0; i < header.size(); ++i) {
      const auto it = std::find_if(cells.begin(), cells.end(),
                                   [&](const auto& c) { return c.first == header[i].first; });
      os << (i ? "," : "") << (it == cells.end() ? "" : detail::csv_cell(it->second));
    }
    os << "\n";
  }
  return os.str();
}

/// `field,value` CSV of a flattened object.
inline std::string to_csv_fields(const json& j) {
  std::ostringstream os;
  os << "field,value\n";
  for (const auto& [k, v] : flatten(j)) os << k << "," << detail::csv_cell(v) << "\n";
  return os.str();
}

}  // namespace ccp
