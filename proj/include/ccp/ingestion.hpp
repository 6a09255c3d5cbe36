#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ccp/commit.hpp"
#include "ccp/error.hpp"
#include "ccp/util.hpp"
#include "json.hpp"

namespace ccp {

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

/// Parses `YYYY-MM-DD[T ]HH:MM:SS[.frac][Z|+HH:MM|-HH:MM|+HHMM]`. A missing
/// offset means UTC. Fractional seconds are truncated.
inline std::optional<UtcSeconds> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    if (pos + len > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':') {
    return std::nullopt;
  }
  const auto y = digits(0, 4), mo = digits(5, 2), d = digits(8, 2);
  const auto h = digits(11, 2), mi = digits(14, 2), se = digits(17, 2);
  if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok() || *h > 23 || *mi > 59 || *se > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
  }
  seconds offset{0};
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      const int sign = s[pos] == '-' ? -1 : 1;
      const auto oh = digits(pos + 1, 2);
      std::optional<int> om;
      if (pos + 3 < s.size() && s[pos + 3] == ':') {
        om = digits(pos + 4, 2);
        pos += 6;
      } else {
        om = digits(pos + 3, 2);
        pos += 5;
      }
      if (!oh || !om || *oh > 23 || *om > 59) return std::nullopt;
      offset = sign * (hours{*oh} + minutes{*om});
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;
  const auto local = sys_days{ymd} + hours{*h} + minutes{*mi} + seconds{*se};
  return local - offset;
}

/// `YYYY-MM-DDTHH:MM:SSZ`
inline std::string format_iso8601(UtcSeconds t) {
  using namespace std::chrono;
  const auto days = floor<std::chrono::days>(t);
  const year_month_day ymd{days};
  const hh_mm_ss tod{t - days};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

// ---------------------------------------------------------------------------
// Commit log parsing
// ---------------------------------------------------------------------------

struct ParseWarning {
  std::size_t record = 0;  // 1-based line (NDJSON) or record index (raw git)
  std::string reason;
};

struct ParseResult {
  std::vector<CommitRecord> records;
  std::size_t skipped = 0;
  std::vector<ParseWarning> warnings;
};

namespace detail {

inline std::optional<CommitRecord> commit_from_json(const nlohmann::json& j,
                                                    std::string& reason) {
  if (!j.is_object()) {
    reason = "record is not a JSON object";
    return std::nullopt;
  }
  auto str = [&](const char* key) -> const std::string* {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return nullptr;
    return it->get_ptr<const std::string*>();
  };
  CommitRecord c;
  for (const char* key : {"repo", "hash", "author", "ts", "msg"}) {
    if (!str(key)) {
      reason = std::string("missing or non-string field '") + key + "'";
      return std::nullopt;
    }
  }
  c.repo_id = *str("repo");
  c.hash = *str("hash");
  c.author_id = ascii_lower(trim(*str("author")));
  c.message = *str("msg");
  if (c.hash.empty()) {
    reason = "empty hash";
    return std::nullopt;
  }
  const auto ts = parse_iso8601(*str("ts"));
  if (!ts) {
    reason = "unparseable timestamp '" + *str("ts") + "'";
    return std::nullopt;
  }
  c.timestamp = *ts;
  if (const auto it = j.find("files"); it != j.end()) {
    if (!it->is_array()) {
      reason = "'files' is not an array";
      return std::nullopt;
    }
    for (const auto& f : *it) {
      if (!f.is_string()) {
        reason = "'files' contains a non-string entry";
        return std::nullopt;
      }
      c.files.push_back(f.get<std::string>());
    }
  }
  if (const auto it = j.find("merge"); it != j.end()) {
    if (!it->is_boolean()) {
      reason = "'merge' is not a boolean";
      return std::nullopt;
    }
    c.is_merge = it->get<bool>();
  }
  return c;
}

/// Drops records whose (repo, hash) was already seen.
inline bool accept_unique(ParseResult& out, std::set<std::pair<std::string, std::string>>& seen,
                          CommitRecord c, std::size_t where) {
  if (!seen.emplace(c.repo_id, c.hash).second) {
    ++out.skipped;
    out.warnings.push_back({where, "duplicate hash " + c.hash + " in " + c.repo_id});
    return false;
  }
  out.records.push_back(std::move(c));
  return true;
}

}  // namespace detail

/// Reads newline-delimited JSON commits. Malformed lines are skipped and
/// counted; a stream without a single usable record is an input error.
inline ParseResult parse_git_log(std::istream& in) {
  if (!in) throw InputError("commit log stream is unreadable");
  ParseResult out;
  std::set<std::pair<std::string, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::string reason;
    std::optional<CommitRecord> rec;
    try {
      rec = detail::commit_from_json(nlohmann::json::parse(line), reason);
    } catch (const nlohmann::json::exception& e) {
      reason = std::string("invalid JSON: ") + e.what();
    }
    if (!rec) {
      ++out.skipped;
      out.warnings.push_back({line_no, reason});
      continue;
    }
    detail::accept_unique(out, seen, std::move(*rec), line_no);
  }
  if (in.bad()) throw InputError("error while reading commit log");
  if (out.records.empty()) {
    throw InputError("commit log contains no parseable records (" +
                     std::to_string(out.skipped) + " skipped)");
  }
  return out;
}

inline ParseResult parse_git_log(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_git_log(in);
}

inline nlohmann::json commit_to_json(const CommitRecord& c) {
  return {{"repo", c.repo_id}, {"hash", c.hash},     {"author", c.author_id},
          {"ts", format_iso8601(c.timestamp)},        {"msg", c.message},
          {"files", c.files},  {"merge", c.is_merge}};
}

/// One NDJSON line, newline-terminated.
inline std::string serialize_commit(const CommitRecord& c) {
  return commit_to_json(c).dump() + "\n";
}

/// The `git log` invocation whose output `parse_raw_git_log` understands.
/// Each commit starts with 0x1E; header fields are NUL-terminated and the
/// name-only file list follows, NUL-separated.
inline constexpr std::string_view kGitLogFormat = "%x1e%H%x00%ae%x00%aI%x00%P%x00%B%x00";

inline std::string log_recipe() {
  std::ostringstream os;
  os << "# Export a repository's history in the format read by `convert-log`:\n"
     << "git -C <repo> log --all --no-color --name-only --no-renames -z \\\n"
     << "    --format='" << kGitLogFormat << "' > <repo>.gitlog\n"
     << "\n"
     << "# Convert to newline-delimited JSON (one object per commit with keys\n"
     << "# repo, hash, author, ts, msg, files, merge):\n"
     << "ccp-miner convert-log --repo <owner/name> <repo>.gitlog > <repo>.ndjson\n";
  return os.str();
}

/// Parses output of the `log_recipe()` command for one repository.
inline ParseResult parse_raw_git_log(std::string_view text, const std::string& repo_id) {
  ParseResult out;
  std::set<std::pair<std::string, std::string>> seen;
  std::size_t index = 0;
  for (const auto& chunk : split(text, '\x1e')) {
    if (chunk.empty()) continue;
    ++index;
    const auto fields = split(chunk, '\0');
    if (fields.size() < 5) {
      ++out.skipped;
      out.warnings.push_back({index, "truncated record"});
      continue;
    }
    CommitRecord c;
    c.repo_id = repo_id;
    c.hash = std::string(trim(fields[0]));
    c.author_id = ascii_lower(trim(fields[1]));
    const auto ts = parse_iso8601(trim(fields[2]));
    if (c.hash.empty() || !ts) {
      ++out.skipped;
      out.warnings.push_back({index, c.hash.empty() ? "empty hash" : "unparseable timestamp"});
      continue;
    }
    c.timestamp = *ts;
    const auto parents = trim(fields[3]);
    c.is_merge = parents.find(' ') != std::string_view::npos;
    auto body = fields[4];
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    c.message = std::move(body);
    for (std::size_t i = 5; i < fields.size(); ++i) {
      const auto path = trim(fields[i]);
      if (!path.empty()) c.files.emplace_back(path);
    }
    detail::accept_unique(out, seen, std::move(c), index);
  }
  if (out.records.empty()) {
    throw InputError("git log output contains no parseable commits");
  }
  return out;
}

/// Partition by UTC calendar year.
inline std::map<int, std::vector<CommitRecord>> window_by_year(
    std::span<const CommitRecord> commits) {
  std::map<int, std::vector<CommitRecord>> out;
  for (const auto& c : commits) out[utc_year(c.timestamp)].push_back(c);
  return out;
}

/// Commits grouped by repository, in repo_id order.
inline std::map<std::string, std::vector<CommitRecord>> group_by_repo(
    std::span<const CommitRecord> commits) {
  std::map<std::string, std::vector<CommitRecord>> out;
  for (const auto& c : commits) out[c.repo_id].push_back(c);
  return out;
}

// ---------------------------------------------------------------------------
// Project selection
// ---------------------------------------------------------------------------

struct ProjectMetadata {
  std::string repo_id;
  std::string owner;
  std::string name;
  bool is_fork = false;
};

/// CSV `repo_id,owner,name,is_fork` (header optional; is_fork is true/false/1/0).
inline std::map<std::string, ProjectMetadata> parse_project_metadata(std::string_view text) {
  std::map<std::string, ProjectMetadata> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.starts_with("repo_id,")) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 4) {
      throw InputError("project metadata: expected 4 columns at line " + std::to_string(line_no));
    }
    ProjectMetadata m{std::string(trim(cols[0])), std::string(trim(cols[1])),
                      std::string(trim(cols[2])), false};
    const auto fork = ascii_lower(trim(cols[3]));
    if (fork == "true" || fork == "1") {
      m.is_fork = true;
    } else if (fork != "false" && fork != "0") {
      throw InputError("project metadata: bad is_fork at line " + std::to_string(line_no));
    }
    out[m.repo_id] = std::move(m);
  }
  return out;
}

struct ProjectDescriptor {
  std::string repo_id;
  std::string owner;
  std::string name;
  bool is_fork = false;
  std::set<std::string> commit_hashes;
  std::map<int, std::set<std::string>> hashes_by_year;
  std::map<int, std::size_t> commit_count_by_year;

  std::size_t commits_in(int year) const {
    const auto it = commit_count_by_year.find(year);
    return it == commit_count_by_year.end() ? 0 : it->second;
  }
  bool operator==(const ProjectDescriptor&) const = default;
};

/// One descriptor per repository. Without metadata, owner/name come from
/// splitting repo_id at its last '/'.
inline std::vector<ProjectDescriptor> build_descriptors(
    std::span<const CommitRecord> commits,
    const std::map<std::string, ProjectMetadata>& metadata = {}) {
  std::map<std::string, ProjectDescriptor> by_repo;
  for (const auto& c : commits) {
    auto& d = by_repo[c.repo_id];
    d.repo_id = c.repo_id;
    d.commit_hashes.insert(c.hash);
    const int y = utc_year(c.timestamp);
    if (d.hashes_by_year[y].insert(c.hash).second) ++d.commit_count_by_year[y];
  }
  std::vector<ProjectDescriptor> out;
  for (auto& [id, d] : by_repo) {
    if (const auto it = metadata.find(id); it != metadata.end()) {
      d.owner = it->second.owner;
      d.name = it->second.name;
      d.is_fork = it->second.is_fork;
    } else if (const auto slash = id.rfind('/'); slash != std::string::npos) {
      d.owner = id.substr(0, slash);
      d.name = id.substr(slash + 1);
    } else {
      d.name = id;
    }
    out.push_back(std::move(d));
  }
  return out;
}

enum class ExclusionRule { MinCommits, Fork, Dominated, SameName };

inline std::string_view to_string(ExclusionRule r) {
  switch (r) {
    case ExclusionRule::MinCommits:
      return "min_commits";
    case ExclusionRule::Fork:
      return "fork";
    case ExclusionRule::Dominated:
      return "dominated";
    case ExclusionRule::SameName:
      return "same_name";
  }
  return "?";
}

struct Exclusion {
  std::string repo_id;
  ExclusionRule rule = ExclusionRule::MinCommits;
  std::string detail;
};

struct SelectionResult {
  std::vector<ProjectDescriptor> accepted;
  std::vector<Exclusion> excluded;
};

inline constexpr std::size_t kDominanceSharedCommits = 50;

/// Applies, in order: minimum yearly commits, fork removal, dominance (more
/// than 50 shared hashes in `year` with a strictly larger surviving project),
/// and same-name deduplication (owner with more input projects wins, then
/// the lexicographically smaller owner).
inline SelectionResult select_projects(std::span<const ProjectDescriptor> projects, int year,
                                       std::size_t min_commits = 200) {
  SelectionResult result;
  std::map<std::string, std::size_t> owner_projects;
  for (const auto& p : projects) ++owner_projects[p.owner];

  std::vector<const ProjectDescriptor*> alive;
  for (const auto& p : projects) {
    if (p.commits_in(year) < min_commits) {
      result.excluded.push_back({p.repo_id, ExclusionRule::MinCommits,
                                 std::to_string(p.commits_in(year)) + " commits in " +
                                     std::to_string(year)});
    } else if (p.is_fork) {
      result.excluded.push_back({p.repo_id, ExclusionRule::Fork, "marked as fork"});
    } else {
      alive.push_back(&p);
    }
  }

  // Larger first: yearly commits, then total commits, then repo_id.
  std::sort(alive.begin(), alive.end(), [&](const auto* a, const auto* b) {
    if (a->commits_in(year) != b->commits_in(year)) {
      return a->commits_in(year) > b->commits_in(year);
    }
    if (a->commit_hashes.size() != b->commit_hashes.size()) {
      return a->commit_hashes.size() > b->commit_hashes.size();
    }
    return a->repo_id < b->repo_id;
  });
  static const std::set<std::string> kNoHashes;
  auto year_hashes = [&](const ProjectDescriptor* p) -> const std::set<std::string>& {
    const auto it = p->hashes_by_year.find(year);
    return it == p->hashes_by_year.end() ? kNoHashes : it->second;
  };
  std::vector<const ProjectDescriptor*> survivors;
  for (const auto* p : alive) {
    const ProjectDescriptor* dominator = nullptr;
    std::size_t shared = 0;
    for (const auto* larger : survivors) {
      const auto& mine = year_hashes(p);
      const auto& theirs = year_hashes(larger);
      shared = static_cast<std::size_t>(std::count_if(
          mine.begin(), mine.end(), [&](const auto& h) { return theirs.contains(h); }));
      if (shared > kDominanceSharedCommits) {
        dominator = larger;
        break;
      }
    }
    if (dominator) {
      result.excluded.push_back({p->repo_id, ExclusionRule::Dominated,
                                 std::to_string(shared) + " shared commits with " +
                                     dominator->repo_id});
    } else {
      survivors.push_back(p);
    }
  }

  std::map<std::string, const ProjectDescriptor*> by_name;
  auto preferred = [&](const ProjectDescriptor* a, const ProjectDescriptor* b) {
    const auto ca = owner_projects[a->owner], cb = owner_projects[b->owner];
    if (ca != cb) return ca > cb;
    if (a->owner != b->owner) return a->owner < b->owner;
    return a->repo_id < b->repo_id;
  };
  for (const auto* p : survivors) {
    auto [it, inserted] = by_name.emplace(p->name, p);
    if (!inserted && preferred(p, it->second)) it->second = p;
  }
  for (const auto* p : survivors) {
    const auto* keep = by_name.at(p->name);
    if (keep == p) {
      result.accepted.push_back(*p);
    } else {
      result.excluded.push_back(
          {p->repo_id, ExclusionRule::SameName, "same name as " + keep->repo_id});
    }
  }
  std::sort(result.accepted.begin(), result.accepted.end(),
            [](const auto& a, const auto& b) { return a.repo_id < b.repo_id; });
  return result;
}

inline constexpr std::size_t kInvolvementThreshold = 12;

/// Authors with at least `threshold` non-merge commits.
inline std::set<std::string> involved_authors(std::span<const CommitRecord> commits,
                                              std::size_t threshold = kInvolvementThreshold) {
  std::map<std::string, std::size_t> counts;
  for (const auto& c : commits) {
    if (!c.is_merge) ++counts[c.author_id];
  }
  std::set<std::string> out;
  for (const auto& [a, n] : counts) {
    if (n >= threshold) out.insert(a);
  }
  return out;
}

}  // namespace ccp
