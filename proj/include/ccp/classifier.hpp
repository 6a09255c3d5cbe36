#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccp/commit.hpp"
#include "ccp/defaults.hpp"
#include "ccp/error.hpp"
#include "ccp/util.hpp"

namespace ccp {

// ---------------------------------------------------------------------------
// Term model
// ---------------------------------------------------------------------------

enum class TermList { Fix, OtherFix, Negation };

/// The three pattern lists that define the corrective-commit classifier.
///
/// Patterns use the ECMAScript regular-expression subset (character classes,
/// alternation, grouping, `\b` anchors). Backreferences are rejected. All
/// patterns are compiled at construction, so a TermModel that exists is valid
/// and classification never throws.
class TermModel {
 public:
  TermModel(std::string model_id, std::vector<std::string> fix,
            std::vector<std::string> other_fix, std::vector<std::string> negation)
      : model_id_(std::move(model_id)),
        fix_(compile_list(std::move(fix), "fix")),
        other_fix_(compile_list(std::move(other_fix), "other_fix")),
        negation_(compile_list(std::move(negation), "negation")) {
    if (model_id_.empty()) model_id_ = "content-" + content_hash();
  }

  /// Parses the line-oriented model file format:
  ///   model_id: <id>
  ///   [fix] / [other_fix] / [negation]
  ///   one pattern per line, `#` starts a comment line.
  static TermModel parse(std::string_view text) {
    std::string id;
    std::vector<std::string> lists[3];
    int section = -1;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
      ++line_no;
      const auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      if (line.starts_with("model_id:")) {
        id = std::string(trim(line.substr(9)));
        continue;
      }
      if (line.front() == '[' && line.back() == ']') {
        const auto name = line.substr(1, line.size() - 2);
        if (name == "fix") {
          section = 0;
        } else if (name == "other_fix") {
          section = 1;
        } else if (name == "negation") {
          section = 2;
        } else {
          throw ModelLoadError("unknown model section [" + std::string(name) +
                               "] at line " + std::to_string(line_no));
        }
        continue;
      }
      if (section < 0) {
        throw ModelLoadError("pattern outside of a section at line " +
                             std::to_string(line_no));
      }
      lists[section].emplace_back(line);
    }
    if (lists[0].empty()) throw ModelLoadError("term model has no [fix] patterns");
    return TermModel(std::move(id), std::move(lists[0]), std::move(lists[1]),
                     std::move(lists[2]));
  }

  static TermModel load(const std::string& path) {
    try {
      return parse(read_file(path));
    } catch (const InputError& e) {
      throw ModelLoadError(e.what());
    }
  }

  static const TermModel& builtin() {
    static const TermModel model = parse(defaults::kDefaultTermModel);
    return model;
  }

  const std::string& model_id() const { return model_id_; }

  std::span<const std::string> patterns(TermList list) const {
    return compiled(list).sources;
  }

  /// Indices of the patterns in `list` that match the already-lowercased text.
  std::vector<std::size_t> matches(TermList list, const std::string& lowered) const {
    const auto& c = compiled(list);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < c.regexes->size(); ++i) {
      if (std::regex_search(lowered, (*c.regexes)[i])) hits.push_back(i);
    }
    return hits;
  }

  /// Fingerprint of the pattern lists; changes whenever any list changes.
  std::string content_hash() const {
    std::string buf;
    for (const auto* c : {&fix_, &other_fix_, &negation_}) {
      for (const auto& s : c->sources) buf.append(s).push_back('\n');
      buf.push_back('\x1e');
    }
    return hex64(fnv1a64(buf));
  }

 private:
  struct CompiledList {
    std::vector<std::string> sources;
    std::shared_ptr<const std::vector<std::regex>> regexes;
  };

  static bool has_backreference(std::string_view p) {
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      if (p[i] == '\\') {
        if (p[i + 1] >= '1' && p[i + 1] <= '9') return true;
        ++i;
      }
    }
    return false;
  }

  static CompiledList compile_list(std::vector<std::string> sources,
                                   std::string_view name) {
    auto regexes = std::make_shared<std::vector<std::regex>>();
    regexes->reserve(sources.size());
    for (const auto& p : sources) {
      if (has_backreference(p)) {
        throw ModelLoadError("backreferences are not supported: " + p);
      }
      try {
        regexes->emplace_back(p, std::regex::ECMAScript | std::regex::nosubs |
                                     std::regex::optimize);
      } catch (const std::regex_error& e) {
        throw ModelLoadError("malformed pattern in [" + std::string(name) +
                             "]: " + p + " (" + e.what() + ")");
      }
    }
    return {std::move(sources), std::move(regexes)};
  }

  const CompiledList& compiled(TermList list) const {
    switch (list) {
      case TermList::Fix:
        return fix_;
      case TermList::OtherFix:
        return other_fix_;
      case TermList::Negation:
        return negation_;
    }
    return fix_;
  }

  std::string model_id_;
  CompiledList fix_;
  CompiledList other_fix_;
  CompiledList negation_;
};

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct ClassifierVerdict {
  std::size_t fix_hits = 0;
  std::size_t other_fix_hits = 0;
  std::size_t negation_hits = 0;
  long score = 0;
  bool corrective = false;
  // Indices into the model's pattern lists, in list order.
  std::vector<std::size_t> fix_matches;
  std::vector<std::size_t> other_fix_matches;
  std::vector<std::size_t> negation_matches;
};

/// Counts distinct pattern matches per list over the lowercased message.
/// Each pattern contributes at most once regardless of how often it occurs.
inline ClassifierVerdict classify_message(std::string_view message,
                                          const TermModel& model) {
  const auto lowered = ascii_lower(message);
  ClassifierVerdict v;
  v.fix_matches = model.matches(TermList::Fix, lowered);
  v.other_fix_matches = model.matches(TermList::OtherFix, lowered);
  v.negation_matches = model.matches(TermList::Negation, lowered);
  v.fix_hits = v.fix_matches.size();
  v.other_fix_hits = v.other_fix_matches.size();
  v.negation_hits = v.negation_matches.size();
  v.score = static_cast<long>(v.fix_hits) - static_cast<long>(v.other_fix_hits) -
            static_cast<long>(v.negation_hits);
  v.corrective = v.score > 0;
  return v;
}

/// Order-preserving classification; result[i] is the verdict for commits[i].
inline std::vector<ClassifierVerdict> classify_commits(
    std::span<const CommitRecord> commits, const TermModel& model) {
  std::vector<ClassifierVerdict> out;
  out.reserve(commits.size());
  for (const auto& c : commits) out.push_back(classify_message(c.message, model));
  return out;
}

// ---------------------------------------------------------------------------
// English detection
// ---------------------------------------------------------------------------

/// Frequent English words (lowercase, at least three letters each).
class EnglishModel {
 public:
  explicit EnglishModel(std::set<std::string> words) : words_(std::move(words)) {
    if (words_.empty()) throw ModelLoadError("English model is empty");
    for (const auto& w : words_) {
      if (w.size() < 3) throw ModelLoadError("English model word too short: " + w);
      if (w != ascii_lower(w)) {
        throw ModelLoadError("English model word not lowercase: " + w);
      }
    }
  }

  static EnglishModel parse(std::string_view text) {
    std::set<std::string> words;
    for (const auto& raw : split(text, '\n')) {
      const auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      words.emplace(line);
    }
    return EnglishModel(std::move(words));
  }

  static EnglishModel load(const std::string& path) {
    try {
      return parse(read_file(path));
    } catch (const InputError& e) {
      throw ModelLoadError(e.what());
    }
  }

  static const EnglishModel& builtin() {
    static const EnglishModel model = parse(defaults::kDefaultEnglishModel);
    return model;
  }

  bool contains(const std::string& word) const { return words_.contains(word); }
  std::size_t size() const { return words_.size(); }

  /// True when any maximal run of ASCII letters in the message is a model word.
  bool matches(std::string_view message) const {
    std::string token;
    auto flush = [&] {
      const bool hit = !token.empty() && words_.contains(token);
      token.clear();
      return hit;
    };
    for (char c : message) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c >= 'a' && c <= 'z') {
        token.push_back(c);
      } else if (flush()) {
        return true;
      }
    }
    return flush();
  }

 private:
  std::set<std::string> words_;
};

/// Fraction of messages containing at least one English model word.
inline double english_hit_rate(std::span<const std::string> messages,
                               const EnglishModel& model) {
  if (messages.empty()) {
    throw UndefinedRateError("English hit rate of an empty message list");
  }
  std::size_t hits = 0;
  for (const auto& m : messages) hits += model.matches(m) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(messages.size());
}

// ---------------------------------------------------------------------------
// Labeled corpora and evaluation
// ---------------------------------------------------------------------------

enum class Certainty { Certain, Uncertain };

struct LabeledCommit {
  std::string message;
  bool label = false;
  std::optional<std::vector<bool>> annotator_labels;
  std::optional<Certainty> certainty;
};

inline std::optional<bool> majority_vote(const std::vector<bool>& votes) {
  const auto yes = static_cast<std::size_t>(std::count(votes.begin(), votes.end(), true));
  const auto no = votes.size() - yes;
  if (yes == no) return std::nullopt;
  return yes > no;
}

namespace detail {

inline std::string unescape_tsv(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      const char n = s[i + 1];
      if (n == 'n') {
        out.push_back('\n');
        ++i;
        continue;
      }
      if (n == 't') {
        out.push_back('\t');
        ++i;
        continue;
      }
      if (n == '\\') {
        out.push_back('\\');
        ++i;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

inline bool parse_label(std::string_view s, std::size_t line_no) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw InputError("label must be 0 or 1 at line " + std::to_string(line_no));
}

}  // namespace detail

/// Parses `label<TAB>message[<TAB>a,b,c[<TAB>certain|uncertain]]` lines.
/// Messages may encode newlines and tabs as `\n` and `\t`.
inline std::vector<LabeledCommit> parse_labeled_corpus(std::string_view text) {
  std::vector<LabeledCommit> corpus;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty() || raw.front() == '#') continue;
    const auto cols = split(raw, '\t');
    if (cols.size() < 2 || cols.size() > 4) {
      throw InputError("expected 2-4 tab-separated columns at line " +
                       std::to_string(line_no));
    }
    LabeledCommit lc;
    lc.label = detail::parse_label(trim(cols[0]), line_no);
    lc.message = detail::unescape_tsv(cols[1]);
    if (cols.size() >= 3 && !trim(cols[2]).empty()) {
      std::vector<bool> votes;
      for (const auto& v : split(trim(cols[2]), ',')) {
        votes.push_back(detail::parse_label(trim(v), line_no));
      }
      const auto maj = majority_vote(votes);
      if (!maj || *maj != lc.label) {
        throw InputError("label disagrees with annotator majority at line " +
                         std::to_string(line_no));
      }
      lc.annotator_labels = std::move(votes);
    }
    if (cols.size() == 4) {
      const auto c = trim(cols[3]);
      if (c == "certain") {
        lc.certainty = Certainty::Certain;
      } else if (c == "uncertain") {
        lc.certainty = Certainty::Uncertain;
      } else if (!c.empty()) {
        throw InputError("certainty must be certain|uncertain at line " +
                         std::to_string(line_no));
      }
    }
    corpus.push_back(std::move(lc));
  }
  return corpus;
}

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fn + fp + tn; }

  std::optional<double> accuracy() const { return ratio(tp + tn, total()); }
  std::optional<double> precision() const { return ratio(tp, tp + fp); }
  std::optional<double> recall() const { return ratio(tp, tp + fn); }
  std::optional<double> fpr() const { return ratio(fp, fp + tn); }
  std::optional<double> hit_rate() const { return ratio(tp + fp, total()); }
  std::optional<double> positive_rate() const { return ratio(tp + fn, total()); }

  /// precision / positive_rate - 1
  std::optional<double> precision_lift() const {
    const auto p = precision();
    const auto pr = positive_rate();
    if (!p || !pr || *pr == 0.0) return std::nullopt;
    return *p / *pr - 1.0;
  }

  void add(bool label, bool predicted) {
    if (label) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  static std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

inline ConfusionMatrix evaluate_model(std::span<const LabeledCommit> corpus,
                                      const TermModel& model) {
  if (corpus.empty()) throw DomainError("cannot evaluate a model on an empty corpus");
  ConfusionMatrix cm;
  for (const auto& lc : corpus) {
    cm.add(lc.label, classify_message(lc.message, model).corrective);
  }
  return cm;
}

/// Cohen's kappa between two annotators' binary labels.
inline double annotator_agreement(const std::vector<bool>& a, const std::vector<bool>& b) {
  if (a.size() != b.size()) throw DomainError("label vectors differ in length");
  if (a.empty()) throw DomainError("label vectors are empty");
  const auto n = static_cast<double>(a.size());
  double agree = 0, a_yes = 0, b_yes = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i] ? 1 : 0;
    a_yes += a[i] ? 1 : 0;
    b_yes += b[i] ? 1 : 0;
  }
  const double p_o = agree / n;
  const double p_e = (a_yes / n) * (b_yes / n) + (1 - a_yes / n) * (1 - b_yes / n);
  if (p_e >= 1.0) {
    throw UndefinedRateError("kappa undefined: chance agreement is 1");
  }
  return (p_o - p_e) / (1 - p_e);
}

struct MessageLengthProfile {
  std::size_t median = 0;
  std::size_t p90 = 0;
};

/// Median and 90th percentile message length in code points (lower rule).
inline MessageLengthProfile terse_message_profile(std::span<const std::string> messages) {
  if (messages.empty()) throw DomainError("message length profile of an empty list");
  std::vector<std::size_t> lengths;
  lengths.reserve(messages.size());
  for (const auto& m : messages) lengths.push_back(utf8_length(m));
  std::sort(lengths.begin(), lengths.end());
  return {lower_quantile_sorted<std::size_t>(lengths, 0.5),
          lower_quantile_sorted<std::size_t>(lengths, 0.9)};
}

}  // namespace ccp
