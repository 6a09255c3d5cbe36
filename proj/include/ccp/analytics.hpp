#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccp/classifier.hpp"
#include "ccp/commit.hpp"
#include "ccp/error.hpp"
#include "ccp/estimator.hpp"
#include "ccp/ingestion.hpp"
#include "ccp/util.hpp"

namespace ccp {

// ---------------------------------------------------------------------------
// Capping
// ---------------------------------------------------------------------------

inline constexpr double kDefaultCapQuantile = 0.99;

/// One-sided winsorizing: values above the lower-rule quantile are set to it.
inline std::vector<double> winsorize(std::span<const double> values,
                                     double quantile = kDefaultCapQuantile) {
  if (values.empty()) throw DomainError("cannot winsorize an empty list");
  if (!(quantile > 0.0 && quantile < 1.0)) throw DomainError("quantile must lie in (0,1)");
  const double cap =
      lower_quantile(std::vector<double>(values.begin(), values.end()), quantile);
  std::vector<double> out(values.begin(), values.end());
  for (auto& v : out) v = std::min(v, cap);
  return out;
}

// ---------------------------------------------------------------------------
// Per-project metrics
// ---------------------------------------------------------------------------

inline CcpEstimate project_ccp(std::span<const CommitRecord> commits, const TermModel& model,
                               const ModelPerformance& perf) {
  if (commits.empty()) throw DomainError("project has no commits");
  std::size_t k = 0;
  for (const auto& c : commits) k += classify_message(c.message, model).corrective ? 1 : 0;
  return estimate_ccp(k, commits.size(), perf);
}

/// Capping rule: a fixed threshold when given, else the values' own quantile.
struct Cap {
  std::optional<double> fixed;
  double quantile = kDefaultCapQuantile;

  std::vector<double> apply(std::span<const double> values) const {
    if (!fixed) return winsorize(values, quantile);
    std::vector<double> out(values.begin(), values.end());
    for (auto& v : out) v = std::min(v, *fixed);
    return out;
  }
};

/// File counts of non-corrective commits that touch at least one file.
inline std::vector<double> noncorrective_sizes(std::span<const CommitRecord> commits,
                                               std::span<const ClassifierVerdict> verdicts) {
  if (commits.size() != verdicts.size()) throw DomainError("commits and verdicts misaligned");
  std::vector<double> sizes;
  for (std::size_t i = 0; i < commits.size(); ++i) {
    if (!verdicts[i].corrective && !commits[i].files.empty()) {
      sizes.push_back(static_cast<double>(commits[i].files.size()));
    }
  }
  return sizes;
}

/// Mean files per non-corrective commit after capping. Commits without files
/// are ignored; absent when nothing remains.
inline std::optional<double> coupling(std::span<const CommitRecord> commits,
                                      std::span<const ClassifierVerdict> verdicts,
                                      const Cap& cap = {}) {
  const auto sizes = noncorrective_sizes(commits, verdicts);
  if (sizes.empty()) return std::nullopt;
  return mean(cap.apply(sizes));
}

inline std::optional<double> coupling(std::span<const CommitRecord> commits,
                                      std::span<const ClassifierVerdict> verdicts,
                                      double cap_quantile) {
  return coupling(commits, verdicts, Cap{std::nullopt, cap_quantile});
}

/// Variant: capped non-corrective commit size averaged per file, then over files.
inline std::optional<double> coupling_per_file(std::span<const CommitRecord> commits,
                                               std::span<const ClassifierVerdict> verdicts,
                                               const Cap& cap = {}) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < commits.size() && i < verdicts.size(); ++i) {
    if (!verdicts[i].corrective && !commits[i].files.empty()) idx.push_back(i);
  }
  const auto sizes = noncorrective_sizes(commits, verdicts);
  if (sizes.empty()) return std::nullopt;
  const auto capped = cap.apply(sizes);
  std::map<std::string, std::pair<double, std::size_t>> per_file;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    for (const auto& f : commits[idx[j]].files) {
      auto& [sum, n] = per_file[f];
      sum += capped[j];
      ++n;
    }
  }
  double total = 0.0;
  for (const auto& [f, acc] : per_file) total += acc.first / static_cast<double>(acc.second);
  return total / static_cast<double>(per_file.size());
}

struct HeadEntry {
  std::string path;
  std::uint64_t size_bytes = 0;
};

/// CSV `path,size_bytes`; the size is taken after the last comma so paths may contain commas.
inline std::vector<HeadEntry> parse_head_listing(std::string_view text) {
  std::vector<HeadEntry> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line == "path,size_bytes") continue;
    const auto comma = line.rfind(',');
    if (comma == std::string_view::npos) {
      throw InputError("head listing: expected path,size_bytes at line " +
                       std::to_string(line_no));
    }
    try {
      out.push_back({std::string(line.substr(0, comma)),
                     std::stoull(std::string(trim(line.substr(comma + 1))))});
    } catch (const std::logic_error&) {
      throw InputError("head listing: bad size at line " + std::to_string(line_no));
    }
  }
  return out;
}

inline std::vector<double> file_sizes_kb(std::span<const HeadEntry> listing) {
  std::vector<double> kb;
  kb.reserve(listing.size());
  for (const auto& e : listing) kb.push_back(static_cast<double>(e.size_bytes) / 1024.0);
  return kb;
}

/// Mean file size in KB (1024 bytes) after capping.
inline double file_length_stats(std::span<const HeadEntry> listing, const Cap& cap = {}) {
  if (listing.empty()) throw DomainError("empty head listing");
  return mean(cap.apply(file_sizes_kb(listing)));
}

inline double file_length_stats(std::span<const HeadEntry> listing, double cap_quantile) {
  return file_length_stats(listing, Cap{std::nullopt, cap_quantile});
}

inline constexpr std::size_t kSpeedCap = 500;

/// Mean non-merge commits per involved author, each count capped at `cap`.
inline std::optional<double> developer_speed(std::span<const CommitRecord> commits,
                                             const std::set<std::string>& involved,
                                             std::size_t cap = kSpeedCap) {
  if (involved.empty()) return std::nullopt;
  std::map<std::string, std::size_t> counts;
  for (const auto& c : commits) {
    if (!c.is_merge && involved.contains(c.author_id)) ++counts[c.author_id];
  }
  double total = 0.0;
  for (const auto& a : involved) {
    const auto it = counts.find(a);
    total += static_cast<double>(std::min(it == counts.end() ? 0 : it->second, cap));
  }
  return total / static_cast<double>(involved.size());
}

/// Fraction of year-t involved developers active in year t+1.
inline std::optional<double> retention(const std::set<std::string>& year_t_involved,
                                       const std::set<std::string>& year_t1_authors) {
  if (year_t_involved.empty()) return std::nullopt;
  std::size_t kept = 0;
  for (const auto& a : year_t_involved) kept += year_t1_authors.contains(a) ? 1 : 0;
  return static_cast<double>(kept) / static_cast<double>(year_t_involved.size());
}

inline constexpr std::size_t kMinNewDevelopers = 10;

/// Among authors first seen in year t+1, the fraction who are involved there.
/// Absent when fewer than `min_new` new authors arrived.
inline std::optional<double> onboarding(const std::set<std::string>& prior_authors,
                                        const std::set<std::string>& year_t1_authors,
                                        const std::set<std::string>& year_t1_involved,
                                        std::size_t min_new = kMinNewDevelopers) {
  std::size_t fresh = 0, fresh_involved = 0;
  for (const auto& a : year_t1_authors) {
    if (prior_authors.contains(a)) continue;
    ++fresh;
    fresh_involved += year_t1_involved.contains(a) ? 1 : 0;
  }
  if (fresh == 0 || fresh < min_new) return std::nullopt;
  return static_cast<double>(fresh_involved) / static_cast<double>(fresh);
}

/// Extensions of general-purpose programming languages considered for dominance.
inline const std::set<std::string>& language_extensions() {
  static const std::set<std::string> exts{
      "c",  "cc",  "cpp",   "cxx",   "h",   "hpp", "cs", "java", "js",    "jsx",
      "ts", "tsx", "py",    "rb",    "php", "go",  "rs", "swift", "kt",   "scala",
      "m",  "sh",  "pl",    "lua",   "r",   "dart", "hs", "ex",   "erl",  "clj",
      "jl", "ml",  "fs",    "vb",    "groovy", "coffee", "elm", "f90", "pas", "ps1"};
  return exts;
}

inline std::string file_extension(std::string_view path) {
  const auto slash = path.find_last_of('/');
  const auto base = slash == std::string_view::npos ? path : path.substr(slash + 1);
  const auto dot = base.rfind('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == base.size()) return {};
  return ascii_lower(base.substr(dot + 1));
}

inline constexpr double kDominantLanguageShare = 0.8;

/// The language extension owning strictly more than 80% of all listed files.
inline std::optional<std::string> dominant_language(std::span<const HeadEntry> listing) {
  if (listing.empty()) throw DomainError("empty head listing");
  std::map<std::string, std::size_t> counts;
  for (const auto& e : listing) ++counts[file_extension(e.path)];
  for (const auto& [ext, n] : counts) {
    if (ext.empty() || !language_extensions().contains(ext)) continue;
    if (static_cast<double>(n) > kDominantLanguageShare * static_cast<double>(listing.size())) {
      return ext;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Project-year bundle
// ---------------------------------------------------------------------------

struct AnalyticsConfig {
  double cap_quantile = kDefaultCapQuantile;
  std::optional<double> coupling_cap;  // fixed file-count cap; else own quantile
  std::optional<double> file_kb_cap;   // fixed file-size cap in KB; else own quantile
  std::size_t involvement_threshold = kInvolvementThreshold;
  std::size_t speed_cap = kSpeedCap;
  std::size_t min_new_developers = kMinNewDevelopers;
};

struct ProjectYearStats {
  std::string repo_id;
  int year = 0;
  std::size_t n_commits = 0;
  std::size_t n_non_merge_commits = 0;
  std::size_t k_hits = 0;
  CcpEstimate ccp;
  std::optional<double> coupling;
  std::optional<double> coupling_per_file;
  std::optional<double> speed;
  std::optional<double> retention;
  std::optional<double> retention_involved;
  std::optional<double> onboarding;
  std::optional<std::string> dominant_language;
  std::optional<double> avg_file_kb;
  std::size_t n_authors = 0;
  std::size_t n_involved = 0;
  int first_year = 0;
};

/// Metrics for `year` of one repository's full history. Retention and
/// onboarding need data after `year` and are absent at the history's end.
inline ProjectYearStats project_year_stats(std::span<const CommitRecord> history, int year,
                                           const TermModel& model,
                                           const ModelPerformance& perf,
                                           const AnalyticsConfig& cfg = {},
                                           std::span<const HeadEntry> head_listing = {}) {
  std::vector<CommitRecord> current, next;
  std::set<std::string> prior_authors, next_authors;
  int first_year = year, last_year = year;
  bool any = false;
  for (const auto& c : history) {
    const int y = utc_year(c.timestamp);
    first_year = any ? std::min(first_year, y) : y;
    last_year = any ? std::max(last_year, y) : y;
    any = true;
    if (y == year) current.push_back(c);
    if (y == year + 1) {
      next.push_back(c);
      next_authors.insert(c.author_id);
    }
    if (y <= year) prior_authors.insert(c.author_id);
  }
  if (current.empty()) {
    throw DomainError("no commits in " + std::to_string(year) + " for " +
                      (history.empty() ? std::string("<empty>") : history.front().repo_id));
  }

  ProjectYearStats s;
  s.repo_id = current.front().repo_id;
  s.year = year;
  s.first_year = first_year;
  s.n_commits = current.size();
  const auto verdicts = classify_commits(current, model);
  std::set<std::string> authors;
  for (std::size_t i = 0; i < current.size(); ++i) {
    s.k_hits += verdicts[i].corrective ? 1 : 0;
    s.n_non_merge_commits += current[i].is_merge ? 0 : 1;
    authors.insert(current[i].author_id);
  }
  s.ccp = estimate_ccp(s.k_hits, s.n_commits, perf);
  const Cap coupling_cap{cfg.coupling_cap, cfg.cap_quantile};
  s.coupling = coupling(current, verdicts, coupling_cap);
  s.coupling_per_file = coupling_per_file(current, verdicts, coupling_cap);
  const auto involved = involved_authors(current, cfg.involvement_threshold);
  s.n_authors = authors.size();
  s.n_involved = involved.size();
  s.speed = developer_speed(current, involved, cfg.speed_cap);
  if (last_year > year) {
    const auto next_involved = involved_authors(next, cfg.involvement_threshold);
    s.retention = ccp::retention(involved, next_authors);
    s.retention_involved = ccp::retention(involved, next_involved);
    s.onboarding =
        ccp::onboarding(prior_authors, next_authors, next_involved, cfg.min_new_developers);
  }
  if (!head_listing.empty()) {
    s.dominant_language = ccp::dominant_language(head_listing);
    s.avg_file_kb = file_length_stats(head_listing, Cap{cfg.file_kb_cap, cfg.cap_quantile});
  }
  return s;
}

// ---------------------------------------------------------------------------
// Quality terms
// ---------------------------------------------------------------------------

struct QualityTermConfig {
  std::size_t file_min_commits = 10;
  double file_rate = 0.1;
  std::size_t project_min_occurrences = 10;
};

struct TermGroupRow {
  std::string group;  // file path or repo_id
  std::size_t n_commits = 0;
  std::size_t term_commits = 0;
  bool has_term = false;
  CcpEstimate ccp;
};

struct QualityTermReport {
  std::string term;
  std::vector<TermGroupRow> files;
  std::vector<TermGroupRow> projects;
};

/// Flags files (>= file_min_commits commits, term rate >= file_rate) and
/// projects (>= project_min_occurrences term commits) and pairs each group
/// with its CCP. Input is any commit collection; projects come from repo_id.
inline QualityTermReport quality_term_analysis(std::span<const CommitRecord> commits,
                                               const std::string& term_pattern,
                                               const TermModel& model,
                                               const ModelPerformance& perf,
                                               const QualityTermConfig& cfg = {}) {
  std::regex term;
  try {
    term = std::regex(term_pattern, std::regex::ECMAScript | std::regex::nosubs);
  } catch (const std::regex_error& e) {
    throw DomainError("bad term pattern '" + term_pattern + "': " + e.what());
  }
  struct Acc {
    std::size_t n = 0, term = 0, k = 0;
  };
  std::map<std::string, Acc> files, projects;
  for (const auto& c : commits) {
    const bool mentions = std::regex_search(ascii_lower(c.message), term);
    const bool corrective = classify_message(c.message, model).corrective;
    auto bump = [&](Acc& a) {
      ++a.n;
      a.term += mentions ? 1 : 0;
      a.k += corrective ? 1 : 0;
    };
    bump(projects[c.repo_id]);
    for (const auto& f : std::set<std::string>(c.files.begin(), c.files.end())) bump(files[f]);
  }
  QualityTermReport r;
  r.term = term_pattern;
  for (const auto& [path, a] : files) {
    if (a.n < cfg.file_min_commits) continue;
    const bool flag =
        static_cast<double>(a.term) >= cfg.file_rate * static_cast<double>(a.n) - 1e-12;
    r.files.push_back({path, a.n, a.term, flag, estimate_ccp(a.k, a.n, perf)});
  }
  for (const auto& [repo, a] : projects) {
    r.projects.push_back({repo, a.n, a.term, a.term >= cfg.project_min_occurrences,
                          estimate_ccp(a.k, a.n, perf)});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Grouping and comparison
// ---------------------------------------------------------------------------

struct GroupSummary {
  std::string group;
  std::size_t n = 0;
  std::optional<double> mean_ccp;
  std::optional<double> lift;  // group mean / complement mean - 1
};

/// Per-group mean CCP and lift against everything outside the group.
/// `grouping` maps repo_id to a group label; unmapped projects are ignored.
/// Groups listed in `labels` but without members are reported with n = 0.
inline std::vector<GroupSummary> group_compare(std::span<const ProjectYearStats> stats,
                                               const std::map<std::string, std::string>& grouping,
                                               std::span<const std::string> labels = {}) {
  std::map<std::string, std::vector<double>> members;
  for (const auto& l : labels) members[l];
  std::vector<std::pair<std::string, double>> all;
  for (const auto& s : stats) {
    const auto it = grouping.find(s.repo_id);
    if (it == grouping.end()) continue;
    members[it->second].push_back(s.ccp.ccp_raw);
    all.emplace_back(it->second, s.ccp.ccp_raw);
  }
  std::vector<GroupSummary> out;
  for (const auto& [label, values] : members) {
    GroupSummary g{label, values.size(), std::nullopt, std::nullopt};
    if (values.empty()) {
      out.push_back(g);
      continue;
    }
    g.mean_ccp = mean(values);
    std::vector<double> rest;
    for (const auto& [l, v] : all) {
      if (l != label) rest.push_back(v);
    }
    if (!rest.empty()) {
      const double m = mean(rest);
      if (m != 0.0) g.lift = *g.mean_ccp / m - 1.0;
    }
    out.push_back(g);
  }
  return out;
}

struct ProjectProfile {
  std::string repo_id;
  int first_year = 0;
  std::size_t developers = 0;
  std::optional<std::string> language;
};

struct ControlGroups {
  std::map<std::string, std::string> age;
  std::map<std::string, std::string> developers;
  std::map<std::string, std::string> language;
};

inline constexpr int kFirstHostedYear = 2008;

/// Age: young (started in the analysis year or the one before), medium (the
/// two years before that), old (2008 up to then); earlier projects are left
/// out. Developers: few (<= p25), intermediate (<= p75), numerous.
inline ControlGroups control_groups(std::span<const ProjectProfile> profiles, int analysis_year) {
  ControlGroups g;
  std::vector<std::size_t> devs;
  for (const auto& p : profiles) devs.push_back(p.developers);
  std::size_t p25 = 0, p75 = 0;
  if (!devs.empty()) {
    std::sort(devs.begin(), devs.end());
    p25 = lower_quantile_sorted<std::size_t>(devs, 0.25);
    p75 = lower_quantile_sorted<std::size_t>(devs, 0.75);
  }
  for (const auto& p : profiles) {
    if (p.first_year >= kFirstHostedYear && p.first_year <= analysis_year) {
      const int age = analysis_year - p.first_year;
      g.age[p.repo_id] = age <= 1 ? "young" : age <= 3 ? "medium" : "old";
    }
    g.developers[p.repo_id] =
        p.developers <= p25 ? "few" : p.developers <= p75 ? "intermediate" : "numerous";
    g.language[p.repo_id] = p.language.value_or("none");
  }
  return g;
}

}  // namespace ccp
