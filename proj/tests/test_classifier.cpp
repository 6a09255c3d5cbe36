#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "ccp/classifier.hpp"
#include "fixture_path.hpp"

namespace {

using ccp::ClassifierVerdict;
using ccp::TermList;
using ccp::TermModel;

ClassifierVerdict verdict(const std::string& msg) {
  return ccp::classify_message(msg, TermModel::builtin());
}

TEST(Classifier, QuotedExamples) {
  const auto not_error = verdict("This is not an error");
  EXPECT_EQ(not_error.fix_hits, 1u);
  EXPECT_EQ(not_error.negation_hits, 1u);
  EXPECT_FALSE(not_error.corrective);

  const auto indentation = verdict("fixed indentation");
  EXPECT_EQ(indentation.fix_hits, 1u);
  EXPECT_EQ(indentation.other_fix_hits, 1u);
  EXPECT_EQ(indentation.score, 0);
  EXPECT_FALSE(indentation.corrective);

  EXPECT_FALSE(verdict("Improve the error message").corrective);
  EXPECT_FALSE(verdict("return the right error code").corrective);
  EXPECT_FALSE(verdict("not a bug").corrective);
  EXPECT_TRUE(verdict("correct this").corrective);
  EXPECT_TRUE(verdict("failure when the cache is cold").corrective);
}

TEST(Classifier, EmptyMessage) {
  const auto v = verdict("");
  EXPECT_EQ(v.fix_hits, 0u);
  EXPECT_EQ(v.other_fix_hits, 0u);
  EXPECT_EQ(v.negation_hits, 0u);
  EXPECT_FALSE(v.corrective);
}

TEST(Classifier, FixCrashOnStartup) {
  // Hand-applied: "fix" and "crash" each match one fix pattern, nothing else matches.
  const auto v = verdict("fix crash on startup");
  EXPECT_EQ(v.fix_hits, 2u);
  EXPECT_EQ(v.other_fix_hits, 0u);
  EXPECT_EQ(v.negation_hits, 0u);
  EXPECT_EQ(v.score, 2);
  EXPECT_TRUE(v.corrective);
}

TEST(Classifier, BareFixTermsAreCorrective) {
  for (const char* m : {"bug", "fix", "Fixed", "bugfix", "hotfix", "error", "crash", "failure",
                        "regression", "Bug in the tokenizer", "FIXES the loader"}) {
    EXPECT_TRUE(verdict(m).corrective) << m;
  }
}

TEST(Classifier, CaseInsensitiveOverSubjectAndBody) {
  EXPECT_TRUE(verdict("Update parser\n\nThis resolves a CRASH on empty input.").corrective);
  EXPECT_EQ(verdict("FIX CRASH").score, verdict("fix crash").score);
}

TEST(Classifier, EachPatternCountsOnce) {
  EXPECT_EQ(verdict("bug").fix_hits, 1u);
  EXPECT_EQ(verdict("bug bug bug bugs").fix_hits, 1u);
}

TEST(Classifier, HitListsReferToModelPatterns) {
  const auto& m = TermModel::builtin();
  const auto v = verdict("fixed indentation");
  ASSERT_EQ(v.fix_matches.size(), 1u);
  ASSERT_EQ(v.other_fix_matches.size(), 1u);
  EXPECT_EQ(m.patterns(TermList::Fix)[v.fix_matches[0]], "\\bfix(es|ed|ing)?\\b");
}

TEST(Classifier, ClassifyCommitsPreservesOrder) {
  std::vector<ccp::CommitRecord> commits(3);
  commits[0].message = "add feature";
  commits[1].message = "fix crash";
  commits[2].message = "";
  const auto out = ccp::classify_commits(commits, TermModel::builtin());
  ASSERT_EQ(out.size(), 3u);
  EXPECT_FALSE(out[0].corrective);
  EXPECT_TRUE(out[1].corrective);
  EXPECT_FALSE(out[2].corrective);
  EXPECT_TRUE(ccp::classify_commits({}, TermModel::builtin()).empty());
}

TEST(TermModelLoad, RejectsBrokenModels) {
  EXPECT_THROW(TermModel::parse("[fix]\n(unclosed\n"), ccp::ModelLoadError);
  EXPECT_THROW(TermModel::parse("[fix]\n(a)\\1\n"), ccp::ModelLoadError);
  EXPECT_THROW(TermModel::parse("[other_fix]\ntypo\n"), ccp::ModelLoadError);
  EXPECT_THROW(TermModel::parse("[fixes]\nbug\n"), ccp::ModelLoadError);
  EXPECT_THROW(TermModel::parse("bug\n[fix]\n"), ccp::ModelLoadError);
  EXPECT_THROW(TermModel::load("/nonexistent/model.txt"), ccp::ModelLoadError);
}

TEST(TermModelLoad, ContentAddressedIdChangesWithLists) {
  const auto a = TermModel::parse("[fix]\nbug\n[negation]\nnot a bug\n");
  const auto b = TermModel::parse("[fix]\nbug\n[negation]\nno bug\n");
  const auto c = TermModel::parse("[fix]\nbug\n[other_fix]\nnot a bug\n");
  EXPECT_EQ(a.model_id().rfind("content-", 0), 0u);
  EXPECT_NE(a.model_id(), b.model_id());
  EXPECT_NE(a.model_id(), c.model_id());
  EXPECT_EQ(a.model_id(), TermModel::parse("[fix]\nbug\n[negation]\nnot a bug\n").model_id());
  EXPECT_EQ(TermModel::parse("model_id: mine\n[fix]\nbug\n").model_id(), "mine");
}

TEST(TermModelLoad, ShippedFileParses) {
  const auto m = TermModel::load(source_path("data/default_model.txt"));
  EXPECT_EQ(m.model_id(), TermModel::builtin().model_id());
  EXPECT_EQ(m.content_hash(), TermModel::builtin().content_hash());
}

// --- properties -------------------------------------------------------------

const std::vector<std::string> kVocabulary{
    "fix",   "bug",     "error", "message", "not",  "a",      "typo",    "the",
    "crash", "indentation", "fixed", "no",   "update", "docs", "failure", "test",
    "é",     "日本",    "\xff",  "\n",     "#12", "wrong",  "broken",  "warning"};

std::string random_message(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> len(0, 12), pick(0, kVocabulary.size() - 1);
  std::string m;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) m += (i ? " " : "") + kVocabulary[pick(rng)];
  return m;
}

TEST(ClassifierProperties, VerdictInvariantsAndDeterminism) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const auto m = random_message(rng);
    const auto v = verdict(m);
    EXPECT_EQ(v.score, static_cast<long>(v.fix_hits) - static_cast<long>(v.other_fix_hits) -
                           static_cast<long>(v.negation_hits));
    EXPECT_EQ(v.corrective, v.score > 0);
    if (v.corrective) {
      EXPECT_GE(v.fix_hits, 1u);
    }
    EXPECT_EQ(verdict(m).fix_matches, v.fix_matches);
  }
}

TEST(ClassifierProperties, TotalOverArbitraryBytes) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> byte(0, 255), len(0, 200);
  for (int i = 0; i < 300; ++i) {
    std::string m(static_cast<std::size_t>(len(rng)), '\0');
    for (auto& c : m) c = static_cast<char>(byte(rng));
    EXPECT_NO_THROW(verdict(m));
  }
}

TEST(ClassifierProperties, AppendingListOnlyTokensIsMonotone) {
  const TermModel m("probe", {"\\bbug\\b", "\\bcrash\\b"}, {"\\btypo\\b"},
                    {"\\bnope\\b", "\\bnothing wrong\\b"});
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto base = random_message(rng);
    const auto s = ccp::classify_message(base, m).score;
    EXPECT_GE(ccp::classify_message(base + " crash", m).score, s);
    EXPECT_LE(ccp::classify_message(base + " nope", m).score, s);
  }
  // The shipped model: "segfault" is fix-only.
  std::mt19937_64 rng2(5);
  for (int i = 0; i < 500; ++i) {
    const auto base = random_message(rng2);
    EXPECT_GE(verdict(base + " segfault").score, verdict(base).score);
  }
}

// --- English model ------------------------------------------------------------

TEST(EnglishModel, Validation) {
  EXPECT_THROW(ccp::EnglishModel({}), ccp::ModelLoadError);
  EXPECT_THROW(ccp::EnglishModel({"of"}), ccp::ModelLoadError);
  EXPECT_THROW(ccp::EnglishModel({"The"}), ccp::ModelLoadError);
  EXPECT_NO_THROW(ccp::EnglishModel({"the"}));
}

TEST(EnglishModel, HitRate) {
  const auto& e = ccp::EnglishModel::builtin();
  const std::vector<std::string> msgs{"Fix the parser", "исправлена ошибка", "wip", "THE END"};
  EXPECT_DOUBLE_EQ(ccp::english_hit_rate(msgs, e), 0.5);
  std::vector<std::string> rev(msgs.rbegin(), msgs.rend());
  EXPECT_DOUBLE_EQ(ccp::english_hit_rate(rev, e), 0.5);
  EXPECT_TRUE(e.matches("there"));
  EXPECT_FALSE(e.matches("thereby"));  // whole tokens only
  EXPECT_THROW(ccp::english_hit_rate({}, e), ccp::UndefinedRateError);
}

TEST(TerseProfile, LowerRuleQuantiles) {
  const std::vector<std::string> msgs{"a", "bb", "ccc", "dddd", "ééééé"};
  const auto p = ccp::terse_message_profile(msgs);
  EXPECT_EQ(p.median, 3u);
  EXPECT_EQ(p.p90, 4u);  // floor(0.9 * 4) = index 3
  EXPECT_THROW(ccp::terse_message_profile({}), ccp::DomainError);
}

// --- labeled corpora ------------------------------------------------------------

TEST(LabeledCorpus, ParsesVotesAndCertainty) {
  const auto c = ccp::parse_labeled_corpus(
      "# comment\n1\tfix it\\nbody\t1,1,0\tuncertain\n0\tadd x\n0\tdocs\t\tcertain\n");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].message, "fix it\nbody");
  ASSERT_TRUE(c[0].annotator_labels);
  EXPECT_EQ(*c[0].annotator_labels, (std::vector<bool>{true, true, false}));
  EXPECT_EQ(c[0].certainty, ccp::Certainty::Uncertain);
  EXPECT_FALSE(c[1].annotator_labels);
  EXPECT_EQ(c[2].certainty, ccp::Certainty::Certain);
}

TEST(LabeledCorpus, LabelMustEqualMajority) {
  EXPECT_THROW(ccp::parse_labeled_corpus("1\tx\t0,0,1\n"), ccp::InputError);
  EXPECT_THROW(ccp::parse_labeled_corpus("1\tx\t0,1\n"), ccp::InputError);
  EXPECT_THROW(ccp::parse_labeled_corpus("yes\tx\n"), ccp::InputError);
  EXPECT_THROW(ccp::parse_labeled_corpus("1\n"), ccp::InputError);
}

TEST(ConfusionMatrix, PublishedTestSetArithmetic) {
  const ccp::ConfusionMatrix cm{228, 43, 34, 795};
  EXPECT_EQ(cm.total(), 1100u);
  EXPECT_NEAR(*cm.accuracy(), 0.930, 5e-4);
  EXPECT_NEAR(*cm.recall(), 0.841, 5e-4);
  EXPECT_NEAR(*cm.precision(), 0.870, 5e-4);
  EXPECT_NEAR(*cm.hit_rate(), 0.238, 5e-4);
  EXPECT_NEAR(*cm.positive_rate(), 0.246, 5e-4);
  EXPECT_NEAR(*cm.precision_lift(), 2.532, 5e-4);
  // The counts give 34/829 = 4.10%; the published rate is 4.2%.
  EXPECT_DOUBLE_EQ(*cm.fpr(), 34.0 / 829.0);
  EXPECT_NEAR(*cm.fpr(), 0.042, 1.1e-3);
}

TEST(ConfusionMatrix, UndefinedRates) {
  const ccp::ConfusionMatrix empty;
  EXPECT_FALSE(empty.accuracy());
  const ccp::ConfusionMatrix no_neg{3, 1, 0, 0};
  EXPECT_FALSE(no_neg.fpr());
  EXPECT_DOUBLE_EQ(*no_neg.recall(), 0.75);
}

TEST(ConfusionMatrix, RateIdentities) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> cell(0, 500);
  for (int i = 0; i < 1000; ++i) {
    const ccp::ConfusionMatrix cm{cell(rng), cell(rng), cell(rng), cell(rng) + 1};
    const auto n = static_cast<double>(cm.total());
    EXPECT_DOUBLE_EQ(*cm.hit_rate() * n, static_cast<double>(cm.tp + cm.fp));
    EXPECT_DOUBLE_EQ(*cm.positive_rate() * n, static_cast<double>(cm.tp + cm.fn));
  }
}

TEST(EvaluateModel, PerfectAgreement) {
  std::vector<ccp::LabeledCommit> c{{"fix crash", true, {}, {}}, {"add docs", false, {}, {}}};
  const auto cm = ccp::evaluate_model(c, TermModel::builtin());
  EXPECT_EQ(cm.fp + cm.fn, 0u);
  EXPECT_DOUBLE_EQ(*cm.accuracy(), 1.0);
  EXPECT_THROW(ccp::evaluate_model({}, TermModel::builtin()), ccp::DomainError);
}

// Verdicts derived by applying the shipped lists to each fixture line by hand.
const std::vector<bool> kGoldHandVerdicts{
    0, 0, 0, 1, 1, 1, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0, 0, 1, 1, 0, 0, 0,
    1, 0, 1, 0, 1, 0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 1, 0, 1, 0, 1};

TEST(GoldCorpus, MatchesHandCounts) {
  const auto corpus = ccp::parse_labeled_corpus(fixture("gold_corpus.tsv"));
  ASSERT_EQ(corpus.size(), 52u);
  ASSERT_EQ(kGoldHandVerdicts.size(), corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(verdict(corpus[i].message).corrective, kGoldHandVerdicts[i]) << corpus[i].message;
  }
  const auto cm = ccp::evaluate_model(corpus, TermModel::builtin());
  EXPECT_EQ(cm, (ccp::ConfusionMatrix{21, 2, 2, 27}));
  EXPECT_EQ(cm.total(), corpus.size());
}

TEST(AnnotatorAgreement, Kappa) {
  const std::vector<bool> a{true, false, true, false};
  EXPECT_DOUBLE_EQ(ccp::annotator_agreement(a, a), 1.0);
  const std::vector<bool> flipped{false, true, false, true};
  EXPECT_DOUBLE_EQ(ccp::annotator_agreement(a, flipped), -1.0);
  // p_o = 3/4, p_e = 1/2 -> 0.5
  EXPECT_DOUBLE_EQ(ccp::annotator_agreement(a, {true, false, true, true}), 0.5);
  EXPECT_THROW(ccp::annotator_agreement({true, true}, {true, true}), ccp::UndefinedRateError);
  EXPECT_THROW(ccp::annotator_agreement({true}, {true, false}), ccp::DomainError);
  EXPECT_THROW(ccp::annotator_agreement({}, {}), ccp::DomainError);
}

}  // namespace
