#include <gtest/gtest.h>

#include <map>

#include "oracles.hpp"
#include "topseg/error.hpp"
#include "topseg/random.hpp"
#include "topseg/topics.hpp"

using namespace topseg;
using namespace topseg::topics;

namespace {

AliasTable liability_table() {
  return AliasTable({{"limitation of liability", {"limitations on liability", "limitations of liability"}},
                     {"privacy", {"privacy policy"}}},
                    {"general"});
}

corpus::Document doc_with_headings(const std::string& id, const std::vector<std::string>& headings) {
  corpus::Document d;
  d.id = id;
  for (const auto& h : headings) d.sections.push_back({{h, "sub"}, std::nullopt, {"text under " + h}});
  return d;
}

}  // namespace

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_heading("3. LIMITATIONS OF LIABILITY"), "limitations of liability");
  EXPECT_EQ(normalize_heading("Limitation of Liability:"), "limitation of liability");
  EXPECT_EQ(normalize_heading("Section IV — Governing Law"), "governing law");
  EXPECT_EQ(normalize_heading("  User's   Content "), "users content");
}

TEST(Normalize, Idempotent) {
  Rng rng(3);
  const std::vector<std::string> parts = {"1.", "iv)", "Section", "A:", " ", "—", "Privacy", "'s", "TERMS", "-", "(b)", "x.", "\t", "&"};
  for (int i = 0; i < 500; ++i) {
    std::string s;
    for (std::size_t j = 0, n = 1 + rng.below(6); j < n; ++j) s += parts[rng.below(parts.size())] + (rng.bernoulli(0.5) ? " " : "");
    const auto once = normalize_heading(s);
    EXPECT_EQ(normalize_heading(once), once) << s;
  }
}

TEST(Aliases, LookupAndBlocklist) {
  const auto t = liability_table();
  EXPECT_EQ(t.lookup("Limitations on Liability"), "limitation of liability");
  EXPECT_EQ(t.lookup("limitation of liability"), "limitation of liability");
  EXPECT_FALSE(t.lookup("General"));
  EXPECT_TRUE(t.blocked("general"));
  EXPECT_EQ(t.topic_count(), 2u);
  EXPECT_EQ(t.topic_index("privacy"), 1u);
}

TEST(Aliases, ConflictingAliasRejected) {
  using Topics = std::map<std::string, std::vector<std::string>>;
  EXPECT_THROW(AliasTable(Topics{{"a", {"x"}}, {"b", {"x"}}}), ValidationError);
}

TEST(Aliases, LoadsJson) {
  const auto t = AliasTable::from_json(R"({"topics": {"privacy": ["privacy notice"]}, "blocklist": ["misc"]})");
  EXPECT_EQ(t.lookup("Privacy Notice"), "privacy");
  EXPECT_TRUE(t.blocked("misc"));
}

TEST(Assign, TopLevelHeadingOnlyAndDropsUnmatched) {
  corpus::Corpus c;
  c.documents.push_back(doc_with_headings("a", {"Limitations on Liability", "Shipping"}));
  c.documents.push_back(doc_with_headings("b", {"Shipping", "General"}));
  c.documents.push_back(doc_with_headings("c", {"Privacy Policy"}));
  const auto out = assign_topics(c, liability_table());
  ASSERT_EQ(out.documents.size(), 2u);
  EXPECT_EQ(out.documents[0].id, "a");
  EXPECT_EQ(out.documents[1].id, "c");
  ASSERT_EQ(out.documents[0].sections.size(), 1u);
  EXPECT_EQ(out.documents[0].sections[0].topic_id, "limitation of liability");
  for (const auto& d : out.documents)
    for (const auto& s : d.sections) EXPECT_TRUE(s.topic_id.has_value());
}

TEST(Assign, EmptyTableIsError) {
  corpus::Corpus c;
  c.documents.push_back(doc_with_headings("a", {"x"}));
  EXPECT_THROW(assign_topics(c, AliasTable(std::map<std::string, std::vector<std::string>>{}, {})), ValidationError);
}

TEST(Candidates, CountsAndOrder) {
  corpus::Corpus c;
  c.documents.push_back(doc_with_headings("a", {"Privacy", "Misc"}));
  c.documents.push_back(doc_with_headings("b", {"1. PRIVACY"}));
  c.documents.push_back(doc_with_headings("c", {"privacy:"}));
  const auto got = build_alias_candidates(c, 3);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], (HeadingCount{"privacy", 3}));
  EXPECT_TRUE(build_alias_candidates(corpus::Corpus{}, 1).empty());
}

TEST(Candidates, MatchLinearScan) {
  Rng rng(9);
  const std::vector<std::string> pool = {"Privacy", "Fees", "1. Fees", "Termination", "TERMINATION:", "Law", "b) Law"};
  corpus::Corpus c;
  for (int i = 0; i < 60; ++i) {
    std::vector<std::string> hs;
    for (std::size_t j = 0, n = 1 + rng.below(4); j < n; ++j) hs.push_back(pool[rng.below(pool.size())]);
    c.documents.push_back(doc_with_headings("d" + std::to_string(i), hs));
  }
  std::map<std::string, std::size_t> scan;
  for (const auto& d : c.documents)
    for (const auto& s : d.sections) ++scan[normalize_heading(s.heading_path.front())];
  const auto got = build_alias_candidates(c, 1);
  ASSERT_EQ(got.size(), scan.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].count, scan.at(got[i].heading));
    if (i) {
      EXPECT_TRUE(got[i - 1].count > got[i].count ||
                  (got[i - 1].count == got[i].count && got[i - 1].heading < got[i].heading));
    }
  }
}
