#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccp/classifier.hpp"
#include "ccp/defaults.hpp"
#include "ccp/error.hpp"
#include "ccp/util.hpp"

namespace ccp {

/// Classifier performance as seen by the estimator. Requires 0 <= fpr < recall <= 1.
struct ModelPerformance {
  double recall = 0.84;
  double fpr = 0.042;
  std::string model_id;

  void validate() const {
    if (!(fpr >= 0.0 && fpr < recall && recall <= 1.0)) {
      throw DomainError("model performance requires 0 <= fpr < recall <= 1 (recall=" +
                        std::to_string(recall) + ", fpr=" + std::to_string(fpr) + ")");
    }
  }

  /// Key-value config: `recall=`, `fpr=`, `model_id=`; `#` comments.
  static ModelPerformance parse(std::string_view text) {
    ModelPerformance perf;
    bool have_recall = false, have_fpr = false;
    for (const auto& raw : split(text, '\n')) {
      const auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ModelLoadError("performance config: expected key=value, got '" +
                             std::string(line) + "'");
      }
      const auto key = trim(line.substr(0, eq));
      const auto value = std::string(trim(line.substr(eq + 1)));
      try {
        if (key == "recall") {
          perf.recall = std::stod(value);
          have_recall = true;
        } else if (key == "fpr") {
          perf.fpr = std::stod(value);
          have_fpr = true;
        } else if (key == "model_id") {
          perf.model_id = value;
        } else {
          throw ModelLoadError("performance config: unknown key '" + std::string(key) + "'");
        }
      } catch (const std::logic_error&) {
        throw ModelLoadError("performance config: bad number for " + std::string(key));
      }
    }
    if (!have_recall || !have_fpr) {
      throw ModelLoadError("performance config must define recall and fpr");
    }
    try {
      perf.validate();
    } catch (const DomainError& e) {
      throw ModelLoadError(e.what());
    }
    return perf;
  }

  static ModelPerformance load(const std::string& path) {
    try {
      return parse(read_file(path));
    } catch (const InputError& e) {
      throw ModelLoadError(e.what());
    }
  }

  static const ModelPerformance& builtin() {
    static const ModelPerformance perf = parse(defaults::kDefaultPerformance);
    return perf;
  }
};

/// Recall and false-positive rate measured on a labeled sample.
inline ModelPerformance fit_performance(const ConfusionMatrix& cm, std::string model_id = {}) {
  const auto recall = cm.recall();
  const auto fpr = cm.fpr();
  if (!recall || !fpr) {
    throw UndefinedRateError("performance needs both positive and negative samples");
  }
  ModelPerformance perf{*recall, *fpr, std::move(model_id)};
  perf.validate();
  return perf;
}

enum class EstimateStatus { Valid, BelowZero, AboveOne };

inline std::string_view to_string(EstimateStatus s) {
  switch (s) {
    case EstimateStatus::Valid:
      return "Valid";
    case EstimateStatus::BelowZero:
      return "BelowZero";
    case EstimateStatus::AboveOne:
      return "AboveOne";
  }
  return "?";
}

struct CcpEstimate {
  std::size_t n = 0;
  std::size_t k = 0;
  double hit_rate = 0.0;
  double ccp_raw = 0.0;
  EstimateStatus status = EstimateStatus::Valid;

  bool valid() const { return status == EstimateStatus::Valid; }
};

/// Hit rate a classifier with `perf` produces on data with positive rate `pr`.
inline double expected_hit_rate(double pr, const ModelPerformance& perf) {
  if (!(pr >= 0.0 && pr <= 1.0)) throw DomainError("positive rate outside [0,1]");
  perf.validate();
  return (perf.recall - perf.fpr) * pr + perf.fpr;
}

/// Maximum-likelihood positive rate for an observed hit rate. Not clamped.
inline double ccp_from_hit_rate(double hr, const ModelPerformance& perf) {
  return (hr - perf.fpr) / (perf.recall - perf.fpr);
}

inline EstimateStatus status_for_hit_rate(double hr, const ModelPerformance& perf) {
  if (hr < perf.fpr) return EstimateStatus::BelowZero;
  if (hr > perf.recall) return EstimateStatus::AboveOne;
  return EstimateStatus::Valid;
}

inline CcpEstimate estimate_ccp(std::size_t k, std::size_t n, const ModelPerformance& perf) {
  if (n == 0) throw DomainError("cannot estimate CCP from zero commits");
  if (k > n) throw DomainError("hit count exceeds commit count");
  perf.validate();
  CcpEstimate e;
  e.n = n;
  e.k = k;
  e.hit_rate = static_cast<double>(k) / static_cast<double>(n);
  e.ccp_raw = ccp_from_hit_rate(e.hit_rate, perf);
  e.status = status_for_hit_rate(e.hit_rate, perf);
  return e;
}

struct HitRateInterval {
  double lower = 0.0;
  double upper = 1.0;
  bool contains(double hr) const { return hr >= lower && hr <= upper; }
};

/// Hit rates for which the estimate is a probability: [fpr, recall].
inline HitRateInterval valid_hit_rate_domain(const ModelPerformance& perf) {
  perf.validate();
  return {perf.fpr, perf.recall};
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

/// (true label, classifier hit) per labeled item.
struct LabeledOutcome {
  bool label = false;
  bool hit = false;
};

inline std::vector<LabeledOutcome> classify_corpus(std::span<const LabeledCommit> corpus,
                                                   const TermModel& model) {
  std::vector<LabeledOutcome> out;
  out.reserve(corpus.size());
  for (const auto& lc : corpus) {
    out.push_back({lc.label, classify_message(lc.message, model).corrective});
  }
  return out;
}

namespace detail {

/// Independent stream per (seed, iteration, attempt) so iterations can run in any order.
inline std::mt19937_64 iteration_rng(std::uint64_t seed, std::uint64_t iteration,
                                     std::uint64_t attempt = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration),
                    static_cast<std::uint32_t>(iteration >> 32),
                    static_cast<std::uint32_t>(attempt)};
  return std::mt19937_64(seq);
}

inline ConfusionMatrix resample_matrix(std::span<const LabeledOutcome> items,
                                       std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, items.size() - 1);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& o = items[pick(rng)];
    cm.add(o.label, o.hit);
  }
  return cm;
}

}  // namespace detail

struct DifferenceSummary {
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct BootstrapReport {
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  double coverage = 0.95;
  std::size_t sample_size = 0;
  ModelPerformance perf;
  DifferenceSummary differences;
};

inline BootstrapReport bootstrap_outcomes(std::span<const LabeledOutcome> items,
                                          const ModelPerformance& perf,
                                          std::size_t iterations, double coverage,
                                          std::uint64_t seed) {
  if (items.empty()) throw DomainError("bootstrap needs a non-empty corpus");
  if (iterations == 0) throw DomainError("bootstrap needs at least one iteration");
  if (!(coverage > 0.0 && coverage < 1.0)) throw DomainError("coverage must lie in (0,1)");
  perf.validate();

  std::vector<double> diffs(iterations);
  for (std::size_t it = 0; it < iterations; ++it) {
    auto rng = detail::iteration_rng(seed, it);
    const auto cm = detail::resample_matrix(items, rng);
    const double truth = *cm.positive_rate();
    diffs[it] = ccp_from_hit_rate(*cm.hit_rate(), perf) - truth;
  }

  BootstrapReport r;
  r.iterations = iterations;
  r.seed = seed;
  r.coverage = coverage;
  r.sample_size = items.size();
  r.perf = perf;
  r.differences.mean = mean(diffs);
  std::sort(diffs.begin(), diffs.end());
  const double tail = (1.0 - coverage) / 2.0;
  r.differences.lower = lower_quantile_sorted<double>(diffs, tail);
  r.differences.upper = lower_quantile_sorted<double>(diffs, 1.0 - tail);
  r.differences.min = diffs.front();
  r.differences.max = diffs.back();
  return r;
}

/// Resamples the corpus with replacement and records (estimated CCP - true
/// positive rate) per resample, with `perf` held fixed.
inline BootstrapReport bootstrap_difference_distribution(
    std::span<const LabeledCommit> corpus, const TermModel& model,
    const ModelPerformance& perf, std::size_t iterations, double coverage,
    std::uint64_t seed) {
  if (corpus.empty()) throw DomainError("bootstrap needs a non-empty corpus");
  const auto items = classify_corpus(corpus, model);
  return bootstrap_outcomes(items, perf, iterations, coverage, seed);
}

struct Segment {
  double lower = 0.0;
  double upper = 1.0;
};

struct SegmentSensitivity {
  Segment segment;
  double max_abs = 0.0;
  double p95_abs = 0.0;
  double mean_abs = 0.0;
};

struct SensitivityReport {
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;
  std::size_t redraws = 0;
  std::vector<SegmentSensitivity> segments;
};

inline const std::vector<Segment>& default_sensitivity_segments() {
  static const std::vector<Segment> segs{{0.0, 1.0}, {0.042, 0.84}, {0.06, 0.39}};
  return segs;
}

inline SensitivityReport sensitivity_outcomes(std::span<const LabeledOutcome> items,
                                              std::size_t iterations,
                                              std::span<const Segment> segments,
                                              std::uint64_t seed) {
  if (items.empty()) throw DomainError("sensitivity needs a non-empty corpus");
  if (iterations == 0) throw DomainError("sensitivity needs at least one iteration");
  if (segments.empty()) throw DomainError("sensitivity needs at least one segment");
  for (const auto& s : segments) {
    if (!(s.lower >= 0.0 && s.upper <= 1.0 && s.lower <= s.upper)) {
      throw DomainError("evaluation segment must lie within [0,1]");
    }
  }

  const std::size_t max_redraws = 100 * iterations + 1000;
  SensitivityReport r;
  r.iterations = iterations;
  r.seed = seed;
  r.sample_size = items.size();
  std::vector<std::vector<double>> per_segment(segments.size());
  for (auto& v : per_segment) v.reserve(iterations);

  for (std::size_t it = 0; it < iterations; ++it) {
    ModelPerformance fitted[2];
    for (int side = 0; side < 2; ++side) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        auto rng = detail::iteration_rng(seed, 2 * it + static_cast<std::size_t>(side), attempt);
        const auto cm = detail::resample_matrix(items, rng);
        const auto recall = cm.recall();
        const auto fpr = cm.fpr();
        if (recall && fpr && *fpr < *recall) {
          fitted[side] = {*recall, *fpr, {}};
          break;
        }
        if (++r.redraws > max_redraws) {
          throw DomainError("sensitivity resamples are degenerate (no positives, no "
                            "negatives, or recall <= fpr)");
        }
      }
    }
    for (std::size_t s = 0; s < segments.size(); ++s) {
      double worst = 0.0;
      for (double x : {segments[s].lower, segments[s].upper}) {
        worst = std::max(worst, std::abs(ccp_from_hit_rate(x, fitted[0]) -
                                         ccp_from_hit_rate(x, fitted[1])));
      }
      per_segment[s].push_back(worst);
    }
  }

  for (std::size_t s = 0; s < segments.size(); ++s) {
    auto& v = per_segment[s];
    SegmentSensitivity out;
    out.segment = segments[s];
    out.mean_abs = mean(v);
    std::sort(v.begin(), v.end());
    out.max_abs = v.back();
    out.p95_abs = lower_quantile_sorted<double>(v, 0.95);
    r.segments.push_back(out);
  }
  return r;
}

/// Draws two resamples per iteration, fits an estimator to each, and reports
/// the largest absolute disagreement over each segment's endpoints. The
/// estimators are linear, so their difference is extremal at the endpoints.
inline SensitivityReport estimator_sensitivity(std::span<const LabeledCommit> corpus,
                                               const TermModel& model,
                                               std::size_t iterations,
                                               std::span<const Segment> segments,
                                               std::uint64_t seed) {
  if (corpus.empty()) throw DomainError("sensitivity needs a non-empty corpus");
  const auto items = classify_corpus(corpus, model);
  return sensitivity_outcomes(items, iterations, segments, seed);
}

// ---------------------------------------------------------------------------
// Quality scale
// ---------------------------------------------------------------------------

/// Reference CCP thresholds by percentile; higher percentile = better quality.
struct DistributionTable {
  struct Row {
    int percentile = 0;
    double ccp = 0.0;
  };
  std::vector<Row> rows;

  void validate() const {
    if (rows.empty()) throw ModelLoadError("distribution table is empty");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].percentile <= rows[i - 1].percentile) {
        throw ModelLoadError("distribution table percentiles must ascend");
      }
      if (rows[i].ccp >= rows[i - 1].ccp) {
        throw ModelLoadError("distribution table CCP thresholds must strictly decrease");
      }
    }
  }

  /// CSV `percentile,ccp`, header optional.
  static DistributionTable parse(std::string_view text) {
    DistributionTable t;
    for (const auto& raw : split(text, '\n')) {
      const auto line = trim(raw);
      if (line.empty() || line.front() == '#' || line.starts_with("percentile")) continue;
      const auto cols = split(line, ',');
      if (cols.size() != 2) throw ModelLoadError("distribution table: expected 2 columns");
      try {
        t.rows.push_back({std::stoi(std::string(trim(cols[0]))),
                          std::stod(std::string(trim(cols[1])))});
      } catch (const std::logic_error&) {
        throw ModelLoadError("distribution table: bad number in '" + std::string(line) + "'");
      }
    }
    t.validate();
    return t;
  }

  static DistributionTable load(const std::string& path) {
    try {
      return parse(read_file(path));
    } catch (const InputError& e) {
      throw ModelLoadError(e.what());
    }
  }

  static const DistributionTable& builtin() {
    static const DistributionTable t = parse(defaults::kDefaultDistributionTable);
    return t;
  }
};

/// A position on the quality scale. `lower == upper` marks an exact threshold
/// hit; otherwise the CCP lies strictly between the two listed percentiles.
struct Band {
  int lower = 0;
  int upper = 100;
  std::string label;

  double position() const { return (lower + upper) / 2.0; }
  bool operator==(const Band&) const = default;
};

inline Band rank_on_scale(double ccp, const DistributionTable& table) {
  if (!(ccp >= 0.0 && ccp <= 1.0)) throw DomainError("CCP to rank must lie in [0,1]");
  table.validate();
  constexpr double eps = 1e-9;
  const auto& rows = table.rows;
  const auto& best = rows.back();
  if (ccp <= best.ccp + eps) {
    return {best.percentile, 100, "top " + std::to_string(100 - best.percentile) + "%"};
  }
  const auto& worst = rows.front();
  if (ccp > worst.ccp + eps) {
    return {0, worst.percentile, "bottom " + std::to_string(worst.percentile) + "%"};
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(ccp - rows[i].ccp) <= eps) {
      const int p = rows[i].percentile;
      return {p, p, p == 50 ? std::string("median") : "percentile " + std::to_string(p)};
    }
    if (i + 1 < rows.size() && ccp < rows[i].ccp && ccp > rows[i + 1].ccp) {
      const int lo = rows[i].percentile;
      const int hi = rows[i + 1].percentile;
      return {lo, hi, "percentile " + std::to_string(lo) + "-" + std::to_string(hi)};
    }
  }
  throw InvariantError("rank_on_scale: no band brackets the CCP");
}

}  // namespace ccp
