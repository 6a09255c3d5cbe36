#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ccp/analytics.hpp"
#include "fixture_path.hpp"

namespace {

using ccp::CommitRecord;
using ccp::HeadEntry;

const ccp::ModelPerformance kDefault{0.84, 0.042, {}};

CommitRecord commit(const std::string& msg, std::size_t n_files = 1, const std::string& author = "a",
                    const char* when = "2019-06-01T00:00:00Z", bool merge = false) {
  static int serial = 0;
  CommitRecord c;
  c.repo_id = "o/r";
  c.hash = "h" + std::to_string(serial++);
  c.author_id = author;
  c.timestamp = *ccp::parse_iso8601(when);
  c.message = msg;
  for (std::size_t i = 0; i < n_files; ++i) c.files.push_back("f" + std::to_string(i));
  c.is_merge = merge;
  return c;
}

TEST(Winsorize, Examples) {
  std::vector<double> ramp(100);
  std::iota(ramp.begin(), ramp.end(), 1.0);
  const auto w = ccp::winsorize(ramp, 0.99);
  // Lower-rule p99 of 1..100 is element floor(0.99 * 99) = 98 -> value 99.
  EXPECT_EQ(w[99], 99.0);
  EXPECT_EQ(w[98], 99.0);
  EXPECT_EQ(w[0], 1.0);
  const std::vector<double> flat(10, 3.0);
  EXPECT_EQ(ccp::winsorize(flat), flat);
  EXPECT_THROW(ccp::winsorize({}), ccp::DomainError);
  EXPECT_THROW(ccp::winsorize(flat, 1.0), ccp::DomainError);
}

TEST(Winsorize, IdempotentAndMonotone) {
  std::mt19937_64 rng(21);
  std::lognormal_distribution<double> heavy(0.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + t % 300);
    for (auto& x : v) x = heavy(rng);
    const auto once = ccp::winsorize(v, 0.95);
    EXPECT_EQ(ccp::winsorize(once, 0.95), once);
    EXPECT_EQ(once.size(), v.size());
    std::sort(v.begin(), v.end());
    const auto sorted = ccp::winsorize(v, 0.95);
    EXPECT_TRUE(std::is_sorted(sorted.begin(), sorted.end()));
  }
}

TEST(ProjectCcp, Examples) {
  std::vector<CommitRecord> negated(20, commit("This is not an error"));
  const auto e = ccp::project_ccp(negated, ccp::TermModel::builtin(), kDefault);
  EXPECT_EQ(e.k, 0u);
  EXPECT_LT(e.ccp_raw, 0.0);
  EXPECT_EQ(e.status, ccp::EstimateStatus::BelowZero);

  std::vector<CommitRecord> forced;
  for (int i = 0; i < 200; ++i) forced.push_back(commit(i < 50 ? "fix crash" : "add feature"));
  const auto f = ccp::project_ccp(forced, ccp::TermModel::builtin(), kDefault);
  EXPECT_EQ(f.k, 50u);
  EXPECT_NEAR(f.ccp_raw, (0.25 - 0.042) / 0.798, 1e-12);

  std::vector<CommitRecord> rate;
  for (int i = 0; i < 1000; ++i) rate.push_back(commit(i < 238 ? "fix crash" : "add feature"));
  EXPECT_NEAR(ccp::project_ccp(rate, ccp::TermModel::builtin(), kDefault).ccp_raw, 0.246, 5e-4);
  EXPECT_THROW(ccp::project_ccp({}, ccp::TermModel::builtin(), kDefault), ccp::DomainError);
}

std::vector<ccp::ClassifierVerdict> verdicts_of(const std::vector<CommitRecord>& cs) {
  return ccp::classify_commits(cs, ccp::TermModel::builtin());
}

TEST(Coupling, Examples) {
  std::vector<CommitRecord> ones(5, commit("add thing", 1));
  EXPECT_DOUBLE_EQ(*ccp::coupling(ones, verdicts_of(ones)), 1.0);

  const std::vector<CommitRecord> mixed{commit("add a", 2), commit("add b", 4),
                                        commit("fix crash", 10), commit("fix bug", 10)};
  EXPECT_DOUBLE_EQ(*ccp::coupling(mixed, verdicts_of(mixed), ccp::Cap{100.0}), 3.0);
  // Two sizes: the lower-rule 0.99 quantile is the smaller one.
  EXPECT_DOUBLE_EQ(*ccp::coupling(mixed, verdicts_of(mixed)), 2.0);

  const std::vector<CommitRecord> only_fixes{commit("fix crash", 3)};
  EXPECT_FALSE(ccp::coupling(only_fixes, verdicts_of(only_fixes)));
  const std::vector<CommitRecord> no_files{commit("add", 0)};
  EXPECT_FALSE(ccp::coupling(no_files, verdicts_of(no_files)));
}

TEST(Coupling, OutlierCappedAtP99) {
  // 199 commits of 2 files and one of 1000: lower-rule p99 of 200 values is
  // element floor(0.99 * 199) = 197 of the sorted sizes, i.e. 2.
  std::vector<CommitRecord> cs(199, commit("add", 2));
  cs.push_back(commit("add", 1000));
  EXPECT_DOUBLE_EQ(*ccp::coupling(cs, verdicts_of(cs)), 2.0);
  // Fixed caps replace the quantile rule.
  EXPECT_DOUBLE_EQ(*ccp::coupling(cs, verdicts_of(cs), ccp::Cap{1000.0}), (199 * 2 + 1000) / 200.0);
  EXPECT_DOUBLE_EQ(*ccp::coupling(cs, verdicts_of(cs), ccp::Cap{3.0}), (199 * 2 + 3) / 200.0);
}

TEST(Coupling, IgnoresCorrectiveCommits) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> files(1, 30);
  std::vector<CommitRecord> cs;
  for (int i = 0; i < 300; ++i) cs.push_back(commit(i % 3 ? "add x" : "fix crash", files(rng)));
  const auto v = verdicts_of(cs);
  const auto base = ccp::coupling(cs, v);
  const auto base_pf = ccp::coupling_per_file(cs, v);
  for (int t = 0; t < 50; ++t) {
    auto perturbed = cs;
    for (std::size_t i = 0; i < perturbed.size(); i += 3) {
      perturbed[i].files.assign(files(rng) * 7, "z" + std::to_string(t));
    }
    EXPECT_EQ(ccp::coupling(perturbed, v), base);
    EXPECT_EQ(ccp::coupling_per_file(perturbed, v), base_pf);
  }
}

TEST(CouplingPerFile, AveragesPerFileFirst) {
  CommitRecord a = commit("add", 0), b = commit("add", 0);
  a.files = {"x", "y"};       // size 2
  b.files = {"x", "y", "z", "w"};  // size 4
  const std::vector<CommitRecord> cs{a, b};
  // x: (2+4)/2 = 3, y: 3, z: 4, w: 4 -> 3.5; per-commit mean is 3.
  const ccp::Cap none{100.0};
  EXPECT_DOUBLE_EQ(*ccp::coupling_per_file(cs, verdicts_of(cs), none), 3.5);
  EXPECT_DOUBLE_EQ(*ccp::coupling(cs, verdicts_of(cs), none), 3.0);
  // With two values the lower-rule quantile is the smaller one: both become 2.
  EXPECT_DOUBLE_EQ(*ccp::coupling_per_file(cs, verdicts_of(cs)), 2.0);
}

TEST(HeadListing, ParseAndStats) {
  const auto listing = ccp::parse_head_listing(fixture("head_listing.csv"));
  ASSERT_EQ(listing.size(), 10u);
  EXPECT_DOUBLE_EQ(ccp::file_length_stats(listing), 8.0);
  EXPECT_EQ(ccp::dominant_language(listing), "rs");
  EXPECT_EQ(ccp::parse_head_listing("dir/a,b.c,42\n").at(0).path, "dir/a,b.c");
  EXPECT_THROW(ccp::parse_head_listing("nocomma\n"), ccp::InputError);
  EXPECT_THROW(ccp::parse_head_listing("a.c,big\n"), ccp::InputError);
  EXPECT_THROW(ccp::file_length_stats({}), ccp::DomainError);
}

TEST(FileLength, CappedMean) {
  std::vector<HeadEntry> listing(99, {"a.c", 1024});
  listing.push_back({"huge.c", 1000 * 1024});
  // Lower-rule p99 over 100 sizes is element floor(0.99 * 99) = 98 -> 1 KB, so the mean is 1 KB.
  EXPECT_DOUBLE_EQ(ccp::file_length_stats(listing), 1.0);
  EXPECT_DOUBLE_EQ(ccp::file_length_stats(listing, ccp::Cap{181.0}), (99.0 + 181.0) / 100.0);
}

std::vector<HeadEntry> files_with(std::size_t n_ext, const std::string& ext, std::size_t total) {
  std::vector<HeadEntry> v;
  for (std::size_t i = 0; i < total; ++i) {
    v.push_back({"src/f" + std::to_string(i) + "." + (i < n_ext ? ext : std::string("md")), 10});
  }
  return v;
}

TEST(DominantLanguage, StrictEightyPercent) {
  EXPECT_EQ(ccp::dominant_language(files_with(90, "rs", 100)), "rs");
  EXPECT_EQ(ccp::dominant_language(files_with(81, "py", 100)), "py");
  EXPECT_FALSE(ccp::dominant_language(files_with(80, "py", 100)));
  EXPECT_FALSE(ccp::dominant_language(files_with(50, "go", 100)));
  EXPECT_FALSE(ccp::dominant_language(files_with(0, "go", 100)));  // all .md
  EXPECT_EQ(ccp::dominant_language(files_with(9, "JAVA", 10)), "java");
  EXPECT_THROW(ccp::dominant_language({}), ccp::DomainError);
}

TEST(DeveloperSpeed, Examples) {
  std::vector<CommitRecord> cs;
  for (int i = 0; i < 700; ++i) cs.push_back(commit("x", 1, "heavy"));
  EXPECT_DOUBLE_EQ(*ccp::developer_speed(cs, {"heavy"}), 500.0);

  std::vector<CommitRecord> two;
  for (int i = 0; i < 20; ++i) two.push_back(commit("x", 1, "p"));
  for (int i = 0; i < 40; ++i) two.push_back(commit("x", 1, "q"));
  for (int i = 0; i < 11; ++i) two.push_back(commit("x", 1, "casual"));
  const auto involved = ccp::involved_authors(two);
  EXPECT_EQ(involved, (std::set<std::string>{"p", "q"}));
  EXPECT_DOUBLE_EQ(*ccp::developer_speed(two, involved), 30.0);
  EXPECT_FALSE(ccp::developer_speed(two, {}));
}

TEST(DeveloperSpeed, InvariantToCasualAuthors) {
  std::vector<CommitRecord> cs;
  for (int i = 0; i < 30; ++i) cs.push_back(commit("x", 1, "core"));
  const auto before = ccp::developer_speed(cs, ccp::involved_authors(cs));
  for (int a = 0; a < 20; ++a) {
    for (int i = 0; i < 11; ++i) cs.push_back(commit("x", 1, "casual" + std::to_string(a)));
  }
  EXPECT_EQ(ccp::developer_speed(cs, ccp::involved_authors(cs)), before);
}

TEST(Retention, Examples) {
  EXPECT_DOUBLE_EQ(*ccp::retention({"A", "B"}, {"A", "C"}), 0.5);
  EXPECT_DOUBLE_EQ(*ccp::retention({"A", "B"}, {"A", "B"}), 1.0);
  EXPECT_DOUBLE_EQ(*ccp::retention({"A", "B"}, {"C"}), 0.0);
  EXPECT_FALSE(ccp::retention({}, {"A"}));
  const std::set<std::string> base{"A", "B", "C"};
  const double kept = *ccp::retention(base, {"A"});
  EXPECT_DOUBLE_EQ(kept + (1.0 - kept), 1.0);
}

std::set<std::string> names(const std::string& prefix, int n) {
  std::set<std::string> s;
  for (int i = 0; i < n; ++i) s.insert(prefix + std::to_string(i));
  return s;
}

TEST(Onboarding, Examples) {
  const auto old_devs = names("old", 5);
  auto t1 = old_devs;
  const auto fresh = names("new", 10);
  t1.insert(fresh.begin(), fresh.end());
  const auto involved = names("new", 5);  // new0..new4
  EXPECT_DOUBLE_EQ(*ccp::onboarding(old_devs, t1, involved), 0.5);
  auto t1_nine = old_devs;
  const auto nine = names("new", 9);
  t1_nine.insert(nine.begin(), nine.end());
  EXPECT_FALSE(ccp::onboarding(old_devs, t1_nine, involved));
  EXPECT_FALSE(ccp::onboarding(old_devs, old_devs, {}));
}

TEST(ProjectYearStats, Bundle) {
  std::vector<CommitRecord> h;
  for (int i = 0; i < 13; ++i) h.push_back(commit("add feature", 2, "core", "2018-05-01T00:00:00Z"));
  for (int i = 0; i < 30; ++i) h.push_back(commit(i < 10 ? "fix crash" : "add feature", 2, "core", "2019-05-01T00:00:00Z"));
  for (int i = 0; i < 12; ++i) h.push_back(commit("add feature", 4, "dev2", "2019-06-01T00:00:00Z"));
  h.push_back(commit("Merge branch 'x'", 0, "core", "2019-06-02T00:00:00Z", true));
  for (int i = 0; i < 5; ++i) h.push_back(commit("add", 1, "core", "2020-01-01T00:00:00Z"));
  ccp::AnalyticsConfig cfg;
  cfg.cap_quantile = 0.999;
  const std::vector<HeadEntry> listing(10, {"x.go", 2048});
  const auto s = ccp::project_year_stats(h, 2019, ccp::TermModel::builtin(), kDefault, cfg, listing);
  EXPECT_EQ(s.n_commits, 43u);
  EXPECT_EQ(s.n_non_merge_commits, 42u);
  EXPECT_EQ(s.k_hits, 10u);
  EXPECT_EQ(s.first_year, 2018);
  EXPECT_EQ(s.n_authors, 2u);
  EXPECT_EQ(s.n_involved, 2u);
  EXPECT_DOUBLE_EQ(*s.speed, (30.0 + 12.0) / 2.0);
  // Non-corrective commits with files: 20 of size 2, 12 of size 4.
  EXPECT_DOUBLE_EQ(*s.coupling, (20 * 2 + 12 * 4) / 32.0);
  EXPECT_DOUBLE_EQ(*s.retention, 0.5);
  EXPECT_DOUBLE_EQ(*s.retention_involved, 0.0);
  EXPECT_FALSE(s.onboarding);
  EXPECT_EQ(s.dominant_language, "go");
  EXPECT_DOUBLE_EQ(*s.avg_file_kb, 2.0);

  const auto last = ccp::project_year_stats(h, 2020, ccp::TermModel::builtin(), kDefault);
  EXPECT_FALSE(last.retention);
  EXPECT_FALSE(last.avg_file_kb);
  EXPECT_THROW(ccp::project_year_stats(h, 2017, ccp::TermModel::builtin(), kDefault),
               ccp::DomainError);
}

TEST(QualityTerms, Thresholds) {
  std::vector<CommitRecord> cs;
  for (int i = 0; i < 10; ++i) {
    auto c = commit(i == 0 ? "remove code smell in parser" : "add feature", 0);
    c.files = {"parser.c"};
    cs.push_back(c);
  }
  for (int i = 0; i < 10; ++i) {
    auto c = commit("add feature", 0);
    c.files = {"lexer.c"};
    cs.push_back(c);
  }
  for (int i = 0; i < 8; ++i) {
    auto c = commit("code smell", 0);
    c.repo_id = "o/other";
    cs.push_back(c);
  }
  const auto r = ccp::quality_term_analysis(cs, "code smells?", ccp::TermModel::builtin(), kDefault);
  ASSERT_EQ(r.files.size(), 2u);
  EXPECT_EQ(r.files[1].group, "parser.c");
  EXPECT_TRUE(r.files[1].has_term);
  EXPECT_FALSE(r.files[0].has_term);
  ASSERT_EQ(r.projects.size(), 2u);
  EXPECT_EQ(r.projects[0].term_commits, 8u);
  EXPECT_FALSE(r.projects[0].has_term);
  EXPECT_FALSE(r.projects[1].has_term);

  const auto none = ccp::quality_term_analysis(cs, "technical debt", ccp::TermModel::builtin(), kDefault);
  for (const auto& row : none.files) EXPECT_FALSE(row.has_term);
  for (const auto& row : none.projects) EXPECT_FALSE(row.has_term);
  EXPECT_THROW(ccp::quality_term_analysis(cs, "(", ccp::TermModel::builtin(), kDefault),
               ccp::DomainError);
}

ccp::ProjectYearStats stat(const std::string& id, double ccp_raw) {
  ccp::ProjectYearStats s;
  s.repo_id = id;
  s.ccp.ccp_raw = ccp_raw;
  return s;
}

TEST(GroupCompare, Examples) {
  const std::vector<ccp::ProjectYearStats> st{stat("a", 0.2), stat("b", 0.2), stat("c", 0.1),
                                              stat("d", 0.1)};
  const std::map<std::string, std::string> g{{"a", "hi"}, {"b", "hi"}, {"c", "lo"}, {"d", "lo"}};
  const std::vector<std::string> labels{"hi", "lo", "empty"};
  const auto out = ccp::group_compare(st, g, labels);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].group, "empty");
  EXPECT_EQ(out[0].n, 0u);
  EXPECT_FALSE(out[0].lift);
  EXPECT_NEAR(*out[1].lift, 1.0, 1e-12);
  EXPECT_NEAR(*out[2].lift, -0.5, 1e-12);

  const std::map<std::string, std::string> equal{{"a", "x"}, {"b", "y"}};
  const auto eq = ccp::group_compare(st, equal);
  EXPECT_DOUBLE_EQ(*eq[0].lift, 0.0);
  EXPECT_DOUBLE_EQ(*eq[1].lift, 0.0);

  const std::map<std::string, std::string> one{{"a", "all"}, {"b", "all"}, {"c", "all"}};
  EXPECT_FALSE(ccp::group_compare(st, one)[0].lift);
}

TEST(GroupCompare, TwoGroupLiftsHaveOppositeSigns) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 0.6);
  for (int t = 0; t < 200; ++t) {
    std::vector<ccp::ProjectYearStats> st;
    std::map<std::string, std::string> g;
    for (int i = 0; i < 10; ++i) {
      const auto id = "p" + std::to_string(i);
      st.push_back(stat(id, u(rng)));
      g[id] = i < 1 + t % 8 ? "a" : "b";
    }
    const auto out = ccp::group_compare(st, g);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_LE(*out[0].lift * *out[1].lift, 0.0);
  }
}

TEST(ControlGroups, AgeDevelopersLanguage) {
  const std::vector<ccp::ProjectProfile> ps{{"y", 2018, 4, "rs"},  {"m", 2016, 10, {}},
                                            {"o", 2010, 20, "py"}, {"x", 2007, 40, "py"},
                                            {"z", 2019, 80, "go"}};
  const auto g = ccp::control_groups(ps, 2019);
  EXPECT_EQ(g.age.at("y"), "young");
  EXPECT_EQ(g.age.at("z"), "young");
  EXPECT_EQ(g.age.at("m"), "medium");
  EXPECT_EQ(g.age.at("o"), "old");
  EXPECT_FALSE(g.age.contains("x"));
  // Sorted developers 4,10,20,40,80: p25 index 1 -> 10, p75 index 3 -> 40.
  EXPECT_EQ(g.developers.at("y"), "few");
  EXPECT_EQ(g.developers.at("m"), "few");
  EXPECT_EQ(g.developers.at("o"), "intermediate");
  EXPECT_EQ(g.developers.at("x"), "intermediate");
  EXPECT_EQ(g.developers.at("z"), "numerous");
  EXPECT_EQ(g.language.at("m"), "none");
  EXPECT_EQ(g.language.at("o"), "py");
}

}  // namespace
