#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccp/error.hpp"
#include "ccp/util.hpp"

namespace ccp {

/// Yearly values of one metric for one entity (project, or developer in a project).
struct MetricSeries {
  std::string entity;
  std::map<int, double> points;
};

/// CSV `entity,year,value` (header optional). Duplicate (entity, year) is an error.
inline std::vector<MetricSeries> parse_series_csv(std::string_view text) {
  std::map<std::string, MetricSeries> by_entity;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#' || line.starts_with("entity,")) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 3) {
      throw InputError("series: expected entity,year,value at line " + std::to_string(line_no));
    }
    int year = 0;
    double value = 0;
    try {
      year = std::stoi(std::string(trim(cols[1])));
      value = std::stod(std::string(trim(cols[2])));
    } catch (const std::logic_error&) {
      throw InputError("series: bad number at line " + std::to_string(line_no));
    }
    auto& s = by_entity[std::string(trim(cols[0]))];
    s.entity = std::string(trim(cols[0]));
    if (!s.points.emplace(year, value).second) {
      throw InputError("series: duplicate year " + std::to_string(year) + " for " + s.entity);
    }
  }
  std::vector<MetricSeries> out;
  for (auto& [e, s] : by_entity) out.push_back(std::move(s));
  return out;
}

/// Sample Pearson correlation coefficient.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("pearson: length mismatch");
  if (xs.size() < 2) throw DomainError("pearson: need at least two points");
  const double mx = mean(xs), my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedRateError("pearson: constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct YearRange {
  int first = 0;
  int last = 0;
  bool contains(int y) const { return y >= first && y <= last; }
};

struct StabilityReport {
  std::size_t n_pairs = 0;
  std::optional<double> pearson;  // absent when either side is constant
  double mean_delta = 0.0;
  double mean_abs_delta = 0.0;
};

/// Pools (v_t, v_t+1) pairs with both years inside `range` (all years if absent).
inline StabilityReport stability(std::span<const MetricSeries> series,
                                 std::optional<YearRange> range = std::nullopt) {
  std::vector<double> before, after;
  for (const auto& s : series) {
    for (const auto& [y, v] : s.points) {
      const auto next = s.points.find(y + 1);
      if (next == s.points.end()) continue;
      if (range && !(range->contains(y) && range->contains(y + 1))) continue;
      before.push_back(v);
      after.push_back(next->second);
    }
  }
  if (before.empty()) throw DomainError("stability: no adjacent-year pairs");
  StabilityReport r;
  r.n_pairs = before.size();
  double d = 0, ad = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    d += after[i] - before[i];
    ad += std::abs(after[i] - before[i]);
  }
  r.mean_delta = d / static_cast<double>(r.n_pairs);
  r.mean_abs_delta = ad / static_cast<double>(r.n_pairs);
  if (before.size() >= 2) {
    try {
      r.pearson = ccp::pearson(before, after);
    } catch (const UndefinedRateError&) {
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Improvement events
// ---------------------------------------------------------------------------

/// How a change is compared with its threshold. `Auto` is strict for a zero
/// threshold and inclusive for a positive one.
enum class Comparator { Strict, Inclusive, Auto };

inline std::string_view to_string(Comparator c) {
  switch (c) {
    case Comparator::Strict:
      return "strict";
    case Comparator::Inclusive:
      return "inclusive";
    case Comparator::Auto:
      return "auto";
  }
  return "?";
}

inline Comparator parse_comparator(std::string_view s) {
  if (s == "strict") return Comparator::Strict;
  if (s == "inclusive") return Comparator::Inclusive;
  if (s == "auto") return Comparator::Auto;
  throw ConfigError("comparator must be strict, inclusive or auto");
}

/// Direction in which a metric improves: CCP improves downward (-1), speed upward (+1).
enum class Direction : int { Down = -1, Up = 1 };

/// True when `change`, oriented by `dir`, clears `threshold`.
inline bool improved(double change, double threshold, Direction dir, Comparator cmp) {
  const double oriented = static_cast<int>(dir) * change;
  const bool strict =
      cmp == Comparator::Strict || (cmp == Comparator::Auto && threshold == 0.0);
  return strict ? oriented > threshold : oriented >= threshold;
}

struct CoChangeReport {
  std::size_t n_pairs = 0;
  std::size_t n_improved_i = 0;
  std::size_t n_improved_j = 0;
  std::size_t n_improved_both = 0;
  double match_rate = 0.0;          // P(imp_i == imp_j)
  std::optional<double> precision;  // P(imp_j | imp_i)
  double base_rate = 0.0;           // P(imp_j)
  std::optional<double> lift;       // precision / base_rate - 1
  double delta_i = 0.0;
  double delta_j = 0.0;
};

struct CoChangeOptions {
  double delta_i = 0.0;
  double delta_j = 0.0;
  Direction dir_i = Direction::Down;
  Direction dir_j = Direction::Down;
  Comparator comparator = Comparator::Auto;
  std::optional<YearRange> window;  // both years of a pair must fall inside
};

inline constexpr int kCoChangeLookbackYears = 5;

/// Window of `kCoChangeLookbackYears` transitions ending at `analysis_year`.
inline YearRange lookback_window(int analysis_year) {
  return {analysis_year - kCoChangeLookbackYears, analysis_year};
}

/// Co-change of two metrics over adjacent-year pairs of the same entity.
inline CoChangeReport co_change(std::span<const MetricSeries> series_i,
                                std::span<const MetricSeries> series_j,
                                const CoChangeOptions& opt) {
  if (opt.delta_i < 0.0 || opt.delta_j < 0.0) throw DomainError("thresholds must be >= 0");
  std::map<std::string, const MetricSeries*> j_by_entity;
  for (const auto& s : series_j) j_by_entity[s.entity] = &s;

  CoChangeReport r;
  r.delta_i = opt.delta_i;
  r.delta_j = opt.delta_j;
  std::size_t matches = 0;
  for (const auto& si : series_i) {
    const auto it = j_by_entity.find(si.entity);
    if (it == j_by_entity.end()) continue;
    const auto& pj = it->second->points;
    for (const auto& [y, vi] : si.points) {
      if (opt.window && !(opt.window->contains(y) && opt.window->contains(y + 1))) continue;
      const auto ni = si.points.find(y + 1);
      const auto cj = pj.find(y);
      const auto nj = pj.find(y + 1);
      if (ni == si.points.end() || cj == pj.end() || nj == pj.end()) continue;
      const bool imp_i = improved(ni->second - vi, opt.delta_i, opt.dir_i, opt.comparator);
      const bool imp_j =
          improved(nj->second - cj->second, opt.delta_j, opt.dir_j, opt.comparator);
      ++r.n_pairs;
      r.n_improved_i += imp_i ? 1 : 0;
      r.n_improved_j += imp_j ? 1 : 0;
      r.n_improved_both += (imp_i && imp_j) ? 1 : 0;
      matches += imp_i == imp_j ? 1 : 0;
    }
  }
  if (r.n_pairs == 0) throw DomainError("co-change: no adjacent-year pairs shared by both metrics");
  const auto n = static_cast<double>(r.n_pairs);
  r.match_rate = static_cast<double>(matches) / n;
  r.base_rate = static_cast<double>(r.n_improved_j) / n;
  if (r.n_improved_i > 0) {
    r.precision =
        static_cast<double>(r.n_improved_both) / static_cast<double>(r.n_improved_i);
    if (r.base_rate > 0.0) r.lift = *r.precision / r.base_rate - 1.0;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Twin analysis
// ---------------------------------------------------------------------------

/// A developer's yearly metric within one project.
struct DeveloperProjectSeries {
  std::string developer;
  std::string project;
  std::map<int, double> points;
};

/// Splits entities of the form `developer|project`.
inline std::vector<DeveloperProjectSeries> to_developer_series(
    std::span<const MetricSeries> series) {
  std::vector<DeveloperProjectSeries> out;
  for (const auto& s : series) {
    const auto bar = s.entity.find('|');
    if (bar == std::string::npos || bar == 0 || bar + 1 == s.entity.size()) {
      throw InputError("developer series entity must be 'developer|project': " + s.entity);
    }
    out.push_back({s.entity.substr(0, bar), s.entity.substr(bar + 1), s.points});
  }
  return out;
}

struct TwinReport {
  std::size_t n_developer_pairs = 0;  // (developer, year, A, B) with A better than B
  std::size_t n_developer_better = 0;
  double precision = 0.0;               // P(developer better in A | A better)
  std::optional<double> base_rate;      // P(developer better in X than Y) over ordered pairs
  std::optional<double> lift;
  double delta_project = 0.0;
  double delta_dev = 0.0;
};

struct TwinOptions {
  double delta_project = 0.0;
  double delta_dev = 0.0;
  Direction direction = Direction::Up;
  Comparator comparator = Comparator::Auto;
};

/// For each developer-year and each unordered pair of the developer's
/// projects, orients the pair so project A beats B by more than
/// delta_project, then checks whether the developer beats themself in A by
/// more than delta_dev.
inline TwinReport twin_analysis(std::span<const DeveloperProjectSeries> dev_series,
                                std::span<const MetricSeries> project_series,
                                const TwinOptions& opt) {
  if (opt.delta_project < 0.0 || opt.delta_dev < 0.0) {
    throw DomainError("thresholds must be >= 0");
  }
  std::map<std::string, const MetricSeries*> projects;
  for (const auto& p : project_series) projects[p.entity] = &p;

  // developer -> year -> [(project, dev value, project value)]
  std::map<std::string, std::map<int, std::vector<std::pair<double, double>>>> grid;
  for (const auto& d : dev_series) {
    const auto pit = projects.find(d.project);
    if (pit == projects.end()) continue;
    for (const auto& [y, v] : d.points) {
      const auto pv = pit->second->points.find(y);
      if (pv == pit->second->points.end()) continue;
      grid[d.developer][y].emplace_back(v, pv->second);
    }
  }

  TwinReport r;
  r.delta_project = opt.delta_project;
  r.delta_dev = opt.delta_dev;
  std::size_t ordered = 0, ordered_better = 0;
  for (const auto& [dev, years] : grid) {
    for (const auto& [y, rows] : years) {
      for (std::size_t a = 0; a < rows.size(); ++a) {
        for (std::size_t b = a + 1; b < rows.size(); ++b) {
          bool counted = false;  // one orientation per unordered pair
          for (const auto& [x, z] : {std::pair{a, b}, std::pair{b, a}}) {
            const bool dev_better = improved(rows[x].first - rows[z].first, opt.delta_dev,
                                             opt.direction, opt.comparator);
            ++ordered;
            ordered_better += dev_better ? 1 : 0;
            if (!counted && improved(rows[x].second - rows[z].second, opt.delta_project,
                                     opt.direction, opt.comparator)) {
              counted = true;
              ++r.n_developer_pairs;
              r.n_developer_better += dev_better ? 1 : 0;
            }
          }
        }
      }
    }
  }
  if (r.n_developer_pairs == 0) throw DomainError("twin analysis: no qualifying project pairs");
  r.precision =
      static_cast<double>(r.n_developer_better) / static_cast<double>(r.n_developer_pairs);
  if (ordered > 0) {
    r.base_rate = static_cast<double>(ordered_better) / static_cast<double>(ordered);
    if (*r.base_rate > 0.0) r.lift = r.precision / *r.base_rate - 1.0;
  }
  return r;
}

}  // namespace ccp
