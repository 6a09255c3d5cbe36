#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ccp/analytics.hpp"
#include "ccp/classifier.hpp"
#include "ccp/error.hpp"
#include "ccp/estimator.hpp"
#include "ccp/ingestion.hpp"
#include "ccp/json_io.hpp"
#include "ccp/stats.hpp"
#include "ccp/version.hpp"

namespace ccp::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kInputError = 3, kInternalError = 4 };

/// Everything that shapes a run. File-backed values may come from the file
/// named by CCP_MINER_CONFIG; command-line flags override them.
struct RunConfig {
  std::string model_path;
  std::string english_model_path;
  std::string perf_path;
  std::string table_path;
  int year = 0;  // 0: latest year present in the input
  std::uint64_t seed = 42;
  std::string format = "json";
  bool enforce_selection = false;
  std::size_t min_commits = 200;
  std::size_t involvement = kInvolvementThreshold;
  std::size_t speed_cap = kSpeedCap;
  std::size_t min_new = kMinNewDevelopers;
  double cap_quantile = kDefaultCapQuantile;
  double coupling_cap = 0.0;  // 0: corpus quantile
  double file_kb_cap = 0.0;   // 0: corpus quantile
  std::string comparator = "auto";
  std::size_t iterations = 10000;
  double coverage = 0.95;
};

/// Reads `key=value` lines; keys mirror the long flag names. Relative paths
/// are resolved against the config file's directory.
inline void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const InputError&) {
    throw ConfigError("cannot read config file " + path);
  }
  const auto base = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& v) {
    const std::filesystem::path p(v);
    return p.is_absolute() || base.empty() ? v : (base / p).string();
  };
  for (const auto& raw : split(text, '\n')) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config: expected key=value: " + raw);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    try {
      if (key == "model") {
        cfg.model_path = resolve(value);
      } else if (key == "english-model") {
        cfg.english_model_path = resolve(value);
      } else if (key == "perf") {
        cfg.perf_path = resolve(value);
      } else if (key == "table") {
        cfg.table_path = resolve(value);
      } else if (key == "year") {
        cfg.year = std::stoi(value);
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "format") {
        cfg.format = value;
      } else if (key == "enforce-selection") {
        cfg.enforce_selection = value == "true" || value == "1";
      } else if (key == "min-commits") {
        cfg.min_commits = std::stoul(value);
      } else if (key == "involvement") {
        cfg.involvement = std::stoul(value);
      } else if (key == "speed-cap") {
        cfg.speed_cap = std::stoul(value);
      } else if (key == "min-new") {
        cfg.min_new = std::stoul(value);
      } else if (key == "cap-quantile") {
        cfg.cap_quantile = std::stod(value);
      } else if (key == "coupling-cap") {
        cfg.coupling_cap = std::stod(value);
      } else if (key == "file-kb-cap") {
        cfg.file_kb_cap = std::stod(value);
      } else if (key == "comparator") {
        cfg.comparator = value;
      } else if (key == "iterations") {
        cfg.iterations = std::stoul(value);
      } else if (key == "coverage") {
        cfg.coverage = std::stod(value);
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw ConfigError("config: bad value for '" + key + "'");
    }
  }
}

/// Models resolved at startup; a run never starts with a broken model.
struct LoadedModels {
  TermModel model;
  EnglishModel english;
  ModelPerformance perf;
  DistributionTable table;

  static LoadedModels load(const RunConfig& cfg) {
    return {cfg.model_path.empty() ? TermModel::builtin() : TermModel::load(cfg.model_path),
            cfg.english_model_path.empty() ? EnglishModel::builtin()
                                           : EnglishModel::load(cfg.english_model_path),
            cfg.perf_path.empty() ? ModelPerformance::builtin()
                                  : ModelPerformance::load(cfg.perf_path),
            cfg.table_path.empty() ? DistributionTable::builtin()
                                   : DistributionTable::load(cfg.table_path)};
  }
};

inline void validate(const RunConfig& cfg) {
  if (cfg.format != "json" && cfg.format != "csv") throw ConfigError("format must be json or csv");
  if (!(cfg.cap_quantile > 0.0 && cfg.cap_quantile < 1.0)) {
    throw ConfigError("cap-quantile must lie in (0,1)");
  }
  if (!(cfg.coverage > 0.0 && cfg.coverage < 1.0)) throw ConfigError("coverage must lie in (0,1)");
  if (cfg.iterations == 0) throw ConfigError("iterations must be positive");
  if (cfg.coupling_cap < 0.0 || cfg.file_kb_cap < 0.0) throw ConfigError("caps must be >= 0");
  parse_comparator(cfg.comparator);
}

/// Fingerprint of everything that influences results (not of file paths).
inline std::string config_hash(const RunConfig& cfg, const LoadedModels& m) {
  std::ostringstream os;
  os.precision(17);
  os << "model=" << m.model.model_id() << ":" << m.model.content_hash()
     << ";perf=" << m.perf.recall << "," << m.perf.fpr << ";table=";
  for (const auto& r : m.table.rows) os << r.percentile << ":" << r.ccp << ",";
  os << ";english=" << m.english.size() << ";year=" << cfg.year << ";seed=" << cfg.seed
     << ";format=" << cfg.format << ";enforce=" << cfg.enforce_selection
     << ";min_commits=" << cfg.min_commits << ";involvement=" << cfg.involvement
     << ";speed_cap=" << cfg.speed_cap << ";min_new=" << cfg.min_new
     << ";cap_quantile=" << cfg.cap_quantile << ";coupling_cap=" << cfg.coupling_cap
     << ";file_kb_cap=" << cfg.file_kb_cap << ";comparator=" << cfg.comparator
     << ";iterations=" << cfg.iterations << ";coverage=" << cfg.coverage;
  return hex64(fnv1a64(os.str()));
}

inline json report_header(const RunConfig& cfg, const LoadedModels& m) {
  return {{"tool", "ccp-miner"},
          {"version", std::string(kVersion)},
          {"model_id", m.model.model_id()},
          {"perf", m.perf},
          {"seed", cfg.seed},
          {"config_hash", config_hash(cfg, m)}};
}

namespace detail {

inline std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  return read_file(path);
}

struct LoadedLog {
  std::vector<CommitRecord> records;
  std::size_t skipped = 0;
};

inline LoadedLog load_logs(const std::vector<std::string>& paths, std::ostream& err) {
  LoadedLog all;
  for (const auto& p : paths) {
    auto parsed = parse_git_log(read_input(p));
    for (const auto& w : parsed.warnings) {
      err << "warning: " << p << ":" << w.record << ": " << w.reason << "\n";
    }
    all.skipped += parsed.skipped;
    all.records.insert(all.records.end(), std::make_move_iterator(parsed.records.begin()),
                       std::make_move_iterator(parsed.records.end()));
  }
  return all;
}

inline json hit_list(const TermModel& m, TermList list, const std::vector<std::size_t>& idx) {
  json arr = json::array();
  const auto pats = m.patterns(list);
  for (auto i : idx) arr.push_back(pats[i]);
  return arr;
}

inline Direction parse_direction(const std::string& s) {
  if (s == "up") return Direction::Up;
  if (s == "down") return Direction::Down;
  throw ConfigError("direction must be up or down");
}

inline Segment parse_segment(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError("segment must be lo:hi, got " + s);
  try {
    return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw ConfigError("segment must be lo:hi, got " + s);
  }
}

inline void emit(std::ostream& out, const RunConfig& cfg, const json& report) {
  if (cfg.format == "csv") {
    out << to_csv_fields(report);
  } else {
    out << report.dump(2) << "\n";
  }
}

inline json diagnostics(const std::vector<std::string>& messages, const EnglishModel& english) {
  const auto profile = terse_message_profile(messages);
  return {{"english_hit_rate", english_hit_rate(messages, english)},
          {"message_length_median", profile.median},
          {"message_length_p90", profile.p90},
          {"reference",
           {{"english_hit_rate_median_below_zero", 0.16},
            {"english_hit_rate_median_valid", 0.54},
            {"message_length_median_below_zero", 27},
            {"message_length_p90_below_zero", 81}}}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

inline int cmd_classify(const std::vector<std::string>& logs, const RunConfig& cfg,
                        const LoadedModels& m, std::ostream& out, std::ostream& err) {
  const auto loaded = detail::load_logs(logs, err);
  for (const auto& c : loaded.records) {
    const auto v = classify_message(c.message, m.model);
    const json line = {{"repo", c.repo_id},
                       {"hash", c.hash},
                       {"corrective", v.corrective},
                       {"score", v.score},
                       {"model_id", m.model.model_id()},
                       {"fix_hits", detail::hit_list(m.model, TermList::Fix, v.fix_matches)},
                       {"other_fix_hits",
                        detail::hit_list(m.model, TermList::OtherFix, v.other_fix_matches)},
                       {"negation_hits",
                        detail::hit_list(m.model, TermList::Negation, v.negation_matches)}};
    if (cfg.format == "csv") {
      out << c.hash << "," << (v.corrective ? 1 : 0) << "," << v.score << "\n";
    } else {
      out << line.dump() << "\n";
    }
  }
  return kOk;
}

struct AnalyzeOptions {
  std::vector<std::string> logs;
  std::string metadata_path;
  std::vector<std::string> head_listings;  // PATH or repo_id=PATH
  std::vector<std::string> quality_terms;
};

inline int cmd_analyze(const AnalyzeOptions& opt, const RunConfig& cfg, const LoadedModels& m,
                       std::ostream& out, std::ostream& err) {
  const auto loaded = detail::load_logs(opt.logs, err);
  const auto by_repo = group_by_repo(loaded.records);

  std::map<std::string, ProjectMetadata> metadata;
  if (!opt.metadata_path.empty()) metadata = parse_project_metadata(read_file(opt.metadata_path));

  std::map<std::string, std::vector<HeadEntry>> listings;
  for (const auto& entry : opt.head_listings) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) {
      if (by_repo.size() != 1) {
        throw ConfigError("--head-listing without repo= needs exactly one repository");
      }
      listings[by_repo.begin()->first] = parse_head_listing(read_file(entry));
    } else {
      listings[entry.substr(0, eq)] = parse_head_listing(read_file(entry.substr(eq + 1)));
    }
  }

  int year = cfg.year;
  if (year == 0) {
    for (const auto& c : loaded.records) year = std::max(year, utc_year(c.timestamp));
  }

  json excluded = json::array();
  std::set<std::string> candidates;
  for (const auto& [repo, _] : by_repo) candidates.insert(repo);
  if (cfg.enforce_selection) {
    const auto descriptors = build_descriptors(loaded.records, metadata);
    const auto sel = select_projects(descriptors, year, cfg.min_commits);
    candidates.clear();
    for (const auto& p : sel.accepted) candidates.insert(p.repo_id);
    for (const auto& e : sel.excluded) excluded.push_back(e);
  }

  AnalyticsConfig acfg;
  acfg.cap_quantile = cfg.cap_quantile;
  acfg.involvement_threshold = cfg.involvement;
  acfg.speed_cap = cfg.speed_cap;
  acfg.min_new_developers = cfg.min_new;

  // Caps come from the whole analyzed corpus unless fixed on the command line.
  std::vector<double> corpus_sizes, corpus_kb;
  for (const auto& repo : candidates) {
    std::vector<CommitRecord> in_year;
    for (const auto& c : by_repo.at(repo)) {
      if (utc_year(c.timestamp) == year) in_year.push_back(c);
    }
    const auto sizes = noncorrective_sizes(in_year, classify_commits(in_year, m.model));
    corpus_sizes.insert(corpus_sizes.end(), sizes.begin(), sizes.end());
    if (const auto lit = listings.find(repo); lit != listings.end()) {
      const auto kb = file_sizes_kb(lit->second);
      corpus_kb.insert(corpus_kb.end(), kb.begin(), kb.end());
    }
  }
  if (cfg.coupling_cap > 0.0) {
    acfg.coupling_cap = cfg.coupling_cap;
  } else if (!corpus_sizes.empty()) {
    acfg.coupling_cap = lower_quantile(corpus_sizes, cfg.cap_quantile);
  }
  if (cfg.file_kb_cap > 0.0) {
    acfg.file_kb_cap = cfg.file_kb_cap;
  } else if (!corpus_kb.empty()) {
    acfg.file_kb_cap = lower_quantile(corpus_kb, cfg.cap_quantile);
  }

  json projects = json::array();
  std::vector<ProjectYearStats> valid_stats;
  std::vector<ProjectProfile> profiles;
  std::vector<CommitRecord> year_commits;
  std::vector<json> csv_rows;
  for (const auto& repo : candidates) {
    const auto& history = by_repo.at(repo);
    const bool active = std::any_of(history.begin(), history.end(), [&](const auto& c) {
      return utc_year(c.timestamp) == year;
    });
    if (!active) {
      excluded.push_back({{"repo_id", repo},
                          {"rule", "no_commits_in_year"},
                          {"detail", "no commits in " + std::to_string(year)}});
      continue;
    }
    const auto lit = listings.find(repo);
    const auto stats =
        project_year_stats(history, year, m.model, m.perf, acfg,
                           lit == listings.end() ? std::span<const HeadEntry>{}
                                                 : std::span<const HeadEntry>(lit->second));
    json entry = stats;
    json band = nullptr;
    if (stats.ccp.valid()) {
      band = rank_on_scale(stats.ccp.ccp_raw, m.table);
      valid_stats.push_back(stats);
      profiles.push_back({repo, stats.first_year, stats.n_authors, stats.dominant_language});
    } else {
      std::vector<std::string> messages;
      for (const auto& c : history) {
        if (utc_year(c.timestamp) == year) messages.push_back(c.message);
      }
      entry["diagnostics"] = detail::diagnostics(messages, m.english);
    }
    entry["band"] = band;
    projects.push_back(entry);
    json row = stats;
    row["band"] = band.is_null() ? std::string() : band["label"].get<std::string>();
    csv_rows.push_back(row);
    for (const auto& c : history) {
      if (utc_year(c.timestamp) == year) year_commits.push_back(c);
    }
  }

  if (cfg.format == "csv") {
    out << to_csv_rows(csv_rows);
    return kOk;
  }

  json report = {{"report", report_header(cfg, m)},
                 {"year", year},
                 {"input", {{"records", loaded.records.size()}, {"skipped", loaded.skipped}}},
                 {"caps",
                  {{"coupling_files", ccp::opt(acfg.coupling_cap)},
                   {"file_kb", ccp::opt(acfg.file_kb_cap)},
                   {"commits_per_developer", acfg.speed_cap}}},
                 {"projects", projects},
                 {"excluded", excluded}};

  if (valid_stats.size() >= 2) {
    const auto groups = control_groups(profiles, year);
    const std::vector<std::string> age_labels{"young", "medium", "old"};
    const std::vector<std::string> dev_labels{"few", "intermediate", "numerous"};
    report["groups"] = {{"age", group_compare(valid_stats, groups.age, age_labels)},
                        {"developers", group_compare(valid_stats, groups.developers, dev_labels)},
                        {"language", group_compare(valid_stats, groups.language)}};
  }
  if (!opt.quality_terms.empty()) {
    json terms = json::array();
    for (const auto& t : opt.quality_terms) {
      terms.push_back(quality_term_analysis(year_commits, t, m.model, m.perf));
    }
    report["quality_terms"] = terms;
  }
  out << report.dump(2) << "\n";
  return kOk;
}

inline int cmd_rank(double value, bool is_hit_rate, const RunConfig& cfg, const LoadedModels& m,
                    std::ostream& out) {
  if (!(value >= 0.0 && value <= 1.0)) throw DomainError("value to rank must lie in [0,1]");
  const double ccp = is_hit_rate ? ccp_from_hit_rate(value, m.perf) : value;
  const auto status = is_hit_rate ? status_for_hit_rate(value, m.perf) : EstimateStatus::Valid;
  json report = {{"report", report_header(cfg, m)},
                 {"input", value},
                 {"input_kind", is_hit_rate ? "hit_rate" : "ccp"},
                 {"ccp", ccp},
                 {"status", std::string(to_string(status))},
                 {"band", nullptr}};
  if (status == EstimateStatus::Valid) report["band"] = rank_on_scale(ccp, m.table);
  detail::emit(out, cfg, report);
  return kOk;
}

inline ModelPerformance bootstrap_perf(const std::string& source, const ConfusionMatrix& cm,
                                       const LoadedModels& m) {
  if (source == "config") return m.perf;
  if (source != "corpus") throw ConfigError("perf-source must be corpus or config");
  return fit_performance(cm, m.model.model_id());
}

inline int cmd_validate_model(const std::string& corpus_path, const std::string& perf_source,
                              const RunConfig& cfg, const LoadedModels& m, std::ostream& out) {
  const auto corpus = parse_labeled_corpus(detail::read_input(corpus_path));
  const auto cm = evaluate_model(corpus, m.model);
  if (cm.total() != corpus.size()) throw InvariantError("confusion matrix does not cover corpus");

  json report = {{"report", report_header(cfg, m)},
                 {"corpus_size", corpus.size()},
                 {"matrix", cm},
                 {"fitted_perf", nullptr},
                 {"annotator_kappa", json::array()}};
  if (cm.recall() && cm.fpr() && *cm.fpr() < *cm.recall()) {
    report["fitted_perf"] = fit_performance(cm, m.model.model_id());
  }

  // Pairwise kappa when every record carries the same number of votes.
  std::size_t annotators = 0;
  bool uniform = !corpus.empty();
  for (const auto& lc : corpus) {
    const auto n = lc.annotator_labels ? lc.annotator_labels->size() : 0;
    if (annotators == 0) annotators = n;
    uniform = uniform && n == annotators && n >= 2;
  }
  if (uniform) {
    for (std::size_t a = 0; a < annotators; ++a) {
      for (std::size_t b = a + 1; b < annotators; ++b) {
        std::vector<bool> la, lb;
        for (const auto& lc : corpus) {
          la.push_back((*lc.annotator_labels)[a]);
          lb.push_back((*lc.annotator_labels)[b]);
        }
        json k = {{"a", a}, {"b", b}, {"kappa", nullptr}};
        try {
          k["kappa"] = annotator_agreement(la, lb);
        } catch (const UndefinedRateError&) {
        }
        report["annotator_kappa"].push_back(k);
      }
    }
  }
  const auto perf = bootstrap_perf(perf_source, cm, m);
  report["bootstrap"] = bootstrap_difference_distribution(corpus, m.model, perf, cfg.iterations,
                                                          cfg.coverage, cfg.seed);
  detail::emit(out, cfg, report);
  return kOk;
}

inline int cmd_bootstrap(const std::string& corpus_path, const std::string& perf_source,
                         const std::vector<std::string>& segment_specs, const RunConfig& cfg,
                         const LoadedModels& m, std::ostream& out) {
  const auto corpus = parse_labeled_corpus(detail::read_input(corpus_path));
  const auto items = classify_corpus(corpus, m.model);
  ConfusionMatrix cm;
  for (const auto& o : items) cm.add(o.label, o.hit);
  if (cm.total() == 0) throw DomainError("bootstrap needs a non-empty corpus");
  const auto perf = bootstrap_perf(perf_source, cm, m);

  std::vector<Segment> segments;
  for (const auto& s : segment_specs) segments.push_back(detail::parse_segment(s));
  if (segments.empty()) segments = default_sensitivity_segments();

  json report = {
      {"report", report_header(cfg, m)},
      {"matrix", cm},
      {"bootstrap", bootstrap_outcomes(items, perf, cfg.iterations, cfg.coverage, cfg.seed)},
      {"sensitivity", sensitivity_outcomes(items, cfg.iterations, segments, cfg.seed)}};
  detail::emit(out, cfg, report);
  return kOk;
}

struct CoChangeArgs {
  std::string series_i;
  std::string series_j;
  double delta_i = 0.0;
  double delta_j = 0.0;
  std::string dir_i = "down";
  std::string dir_j = "down";
  bool all_years = false;
};

inline int cmd_cochange(const CoChangeArgs& a, const RunConfig& cfg, const LoadedModels& m,
                        std::ostream& out) {
  const auto si = parse_series_csv(read_file(a.series_i));
  const auto sj = parse_series_csv(read_file(a.series_j));
  CoChangeOptions opt;
  opt.delta_i = a.delta_i;
  opt.delta_j = a.delta_j;
  opt.dir_i = detail::parse_direction(a.dir_i);
  opt.dir_j = detail::parse_direction(a.dir_j);
  opt.comparator = parse_comparator(cfg.comparator);
  if (cfg.year != 0 && !a.all_years) opt.window = lookback_window(cfg.year);

  auto safe_stability = [&](const std::vector<MetricSeries>& s) -> json {
    try {
      return stability(s, opt.window);
    } catch (const DomainError&) {
      return nullptr;
    }
  };
  json window = nullptr;
  if (opt.window) window = {{"first", opt.window->first}, {"last", opt.window->last}};
  json report = {{"report", report_header(cfg, m)},
                 {"comparator", cfg.comparator},
                 {"window", window},
                 {"cochange", co_change(si, sj, opt)},
                 {"stability_i", safe_stability(si)},
                 {"stability_j", safe_stability(sj)}};
  detail::emit(out, cfg, report);
  return kOk;
}

struct TwinArgs {
  std::string developer_series;
  std::string project_series;
  double delta_project = 0.0;
  double delta_dev = 0.0;
  std::string direction = "up";
};

inline int cmd_twin(const TwinArgs& a, const RunConfig& cfg, const LoadedModels& m,
                    std::ostream& out) {
  const auto devs = to_developer_series(parse_series_csv(read_file(a.developer_series)));
  const auto projects = parse_series_csv(read_file(a.project_series));
  TwinOptions opt;
  opt.delta_project = a.delta_project;
  opt.delta_dev = a.delta_dev;
  opt.direction = detail::parse_direction(a.direction);
  opt.comparator = parse_comparator(cfg.comparator);
  json report = {{"report", report_header(cfg, m)},
                 {"comparator", cfg.comparator},
                 {"twin", twin_analysis(devs, projects, opt)}};
  detail::emit(out, cfg, report);
  return kOk;
}

inline int cmd_convert_log(const std::string& path, const std::string& repo, std::ostream& out,
                           std::ostream& err) {
  const auto parsed = parse_raw_git_log(detail::read_input(path), repo);
  for (const auto& w : parsed.warnings) {
    err << "warning: " << path << ": record " << w.record << ": " << w.reason << "\n";
  }
  for (const auto& c : parsed.records) out << serialize_commit(c);
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Runs the tool with `args` (program name excluded). `config_file` stands in
/// for the CCP_MINER_CONFIG environment variable.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err,
               std::optional<std::string> config_file = std::nullopt) {
  RunConfig cfg;
  try {
    if (config_file && !config_file->empty()) apply_config_file(*config_file, cfg);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  CLI::App app{"Corrective commit probability miner", "ccp-miner"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));
  app.add_option("--model", cfg.model_path, "Term model file");
  app.add_option("--english-model", cfg.english_model_path, "English word list");
  app.add_option("--perf", cfg.perf_path, "Performance config (recall=, fpr=)");
  app.add_option("--table", cfg.table_path, "Distribution table CSV (percentile,ccp)");
  app.add_option("--year", cfg.year, "Analysis year (default: latest in input)");
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--format", cfg.format, "Output format: json or csv");
  app.add_flag("--enforce-selection", cfg.enforce_selection, "Apply project selection rules");
  app.add_option("--min-commits", cfg.min_commits, "Minimum commits in the analysis year");
  app.add_option("--involvement", cfg.involvement, "Commits per year for an involved developer");
  app.add_option("--speed-cap", cfg.speed_cap, "Cap on commits per developer");
  app.add_option("--min-new", cfg.min_new, "Minimum new developers for onboarding");
  app.add_option("--cap-quantile", cfg.cap_quantile, "Winsorizing quantile");
  app.add_option("--coupling-cap", cfg.coupling_cap, "Fixed cap on files per commit (0: corpus quantile)");
  app.add_option("--file-kb-cap", cfg.file_kb_cap, "Fixed cap on file size in KB (0: corpus quantile)");
  app.add_option("--comparator", cfg.comparator, "Threshold comparator: strict|inclusive|auto");
  app.add_option("--iterations", cfg.iterations, "Bootstrap iterations");
  app.add_option("--coverage", cfg.coverage, "Bootstrap central interval coverage");

  std::vector<std::string> logs;
  auto* classify = app.add_subcommand("classify", "Classify every commit of NDJSON logs");
  classify->add_option("logs", logs, "NDJSON commit logs ('-' for stdin)")->required();

  AnalyzeOptions analyze_opt;
  auto* analyze = app.add_subcommand("analyze", "Per-project CCP, rank, and metrics");
  analyze->add_option("logs", analyze_opt.logs, "NDJSON commit logs")->required();
  analyze->add_option("--metadata", analyze_opt.metadata_path, "CSV repo_id,owner,name,is_fork");
  analyze->add_option("--head-listing", analyze_opt.head_listings,
                      "HEAD listing CSV path,size_bytes (PATH or repo_id=PATH)");
  analyze->add_option("--quality-term", analyze_opt.quality_terms,
                      "Pattern for quality-term analysis");

  double rank_value = 0.0;
  bool rank_hit_rate = false;
  auto* rank = app.add_subcommand("rank", "Place a CCP (or hit rate) on the quality scale");
  rank->add_option("value", rank_value, "CCP value in [0,1]")->required();
  rank->add_flag("--hit-rate", rank_hit_rate, "Interpret the value as a hit rate");

  std::string corpus_path;
  std::string perf_source = "corpus";
  auto* validate_model = app.add_subcommand("validate-model", "Evaluate the model on a corpus");
  validate_model->add_option("corpus", corpus_path, "Labeled corpus TSV")->required();
  validate_model->add_option("--perf-source", perf_source,
                             "Bootstrap performance: corpus (fitted) or config");

  std::vector<std::string> segments;
  auto* bootstrap = app.add_subcommand("bootstrap", "Estimator bootstrap and sensitivity");
  bootstrap->add_option("corpus", corpus_path, "Labeled corpus TSV")->required();
  bootstrap->add_option("--perf-source", perf_source,
                        "Bootstrap performance: corpus (fitted) or config");
  bootstrap->add_option("--segment", segments, "Hit-rate segment lo:hi (repeatable)");

  CoChangeArgs co;
  auto* cochange = app.add_subcommand("cochange", "Co-change of two metric series");
  cochange->add_option("--series-i", co.series_i, "CSV entity,year,value")->required();
  cochange->add_option("--series-j", co.series_j, "CSV entity,year,value")->required();
  cochange->add_option("--delta-i", co.delta_i, "Improvement threshold for metric i");
  cochange->add_option("--delta-j", co.delta_j, "Improvement threshold for metric j");
  cochange->add_option("--dir-i", co.dir_i, "Improvement direction of metric i: up|down");
  cochange->add_option("--dir-j", co.dir_j, "Improvement direction of metric j: up|down");
  cochange->add_flag("--all-years", co.all_years, "Ignore the lookback window");

  TwinArgs tw;
  auto* twin = app.add_subcommand("twin", "Same-developer comparison across projects");
  twin->add_option("--developer-series", tw.developer_series,
                   "CSV entity,year,value with entity developer|project")
      ->required();
  twin->add_option("--project-series", tw.project_series, "CSV entity,year,value")->required();
  twin->add_option("--delta-project", tw.delta_project, "Project difference threshold");
  twin->add_option("--delta-dev", tw.delta_dev, "Developer difference threshold");
  twin->add_option("--direction", tw.direction, "Improvement direction: up|down");

  auto* recipe = app.add_subcommand("export-log-recipe", "Print the git log export recipe");

  std::string raw_path, raw_repo;
  auto* convert = app.add_subcommand("convert-log", "Convert raw git log output to NDJSON");
  convert->add_option("input", raw_path, "Output of the export recipe ('-' for stdin)")
      ->required();
  convert->add_option("--repo", raw_repo, "Repository id to stamp on records")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    validate(cfg);
    if (recipe->parsed()) {
      out << log_recipe();
      return kOk;
    }
    if (convert->parsed()) return cmd_convert_log(raw_path, raw_repo, out, err);

    const auto models = LoadedModels::load(cfg);
    if (!models.perf.model_id.empty() && models.perf.model_id != models.model.model_id()) {
      err << "warning: performance config was measured for model '" << models.perf.model_id
          << "' but the term model is '" << models.model.model_id() << "'\n";
    }
    if (classify->parsed()) return cmd_classify(logs, cfg, models, out, err);
    if (analyze->parsed()) return cmd_analyze(analyze_opt, cfg, models, out, err);
    if (rank->parsed()) return cmd_rank(rank_value, rank_hit_rate, cfg, models, out);
    if (validate_model->parsed()) {
      return cmd_validate_model(corpus_path, perf_source, cfg, models, out);
    }
    if (bootstrap->parsed()) {
      return cmd_bootstrap(corpus_path, perf_source, segments, cfg, models, out);
    }
    if (cochange->parsed()) return cmd_cochange(co, cfg, models, out);
    if (twin->parsed()) return cmd_twin(tw, cfg, models, out);
    throw InvariantError("no subcommand dispatched");
  } catch (const ModelLoadError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvariantError& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace ccp::cli
