#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "oracles.hpp"
#include "topseg/corpus.hpp"
#include "topseg/error.hpp"
#include "topseg/extract.hpp"
#include "topseg/html.hpp"
#include "topseg/random.hpp"
#include "topseg/text.hpp"

using namespace topseg;
using namespace topseg::extract;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kFixtures = TOPSEG_FIXTURE_DIR;

std::vector<std::string> fixture_names() {
  return {"headings_only", "bold_enum", "list_items", "below_threshold", "nested_hierarchy", "orphan_text"};
}

std::string words(const std::string& s) { return text::collapse_whitespace(s); }

}  // namespace

TEST(Clean, OrphanTextWrapped) {
  const auto t = clean_html("<div>hello</div>");
  std::vector<const Node*> paragraphs;
  std::function<void(const Node&)> walk = [&](const Node& n) {
    if (n.is_element("p")) paragraphs.push_back(&n);
    for (const auto& c : n.children) walk(c);
  };
  walk(t.root);
  ASSERT_EQ(paragraphs.size(), 1u);
  EXPECT_EQ(text_content(*paragraphs[0]), "hello");
}

TEST(Clean, HeadingHoistedOutOfParagraph) {
  const auto t = clean_html("<p>intro <h2>Title</h2> rest</p>");
  ASSERT_EQ(t.root.children.size(), 3u);
  EXPECT_TRUE(t.root.children[0].is_element("p"));
  EXPECT_TRUE(t.root.children[1].is_element("h2"));
  EXPECT_TRUE(t.root.children[2].is_element("p"));
  EXPECT_EQ(words(text_content(t.root.children[0])), "intro");
  EXPECT_EQ(words(text_content(t.root.children[2])), "rest");
}

TEST(Clean, NoTextIsError) {
  EXPECT_THROW(clean_html("<html><body><img src=x><br></body></html>"), ValidationError);
  EXPECT_THROW(clean_html(""), ValidationError);
}

TEST(Clean, LinkHeavyBlocksDropped) {
  const auto t = clean_html("<div><a href=1>Home</a> <a href=2>Blog</a> x</div><p>We may update these terms.</p>");
  EXPECT_EQ(words(text_content(t.root)), "We may update these terms.");
}

TEST(Language, Ratios) {
  EXPECT_DOUBLE_EQ(english_ratio(clean_html("<p>You agree to the terms of this site.</p><p>We may change it.</p>")), 1.0);
  EXPECT_DOUBLE_EQ(english_ratio(clean_html("<p>You agree to the terms of this site.</p>"
                                            "<p>Diese Bedingungen gelten für alle Nutzer der Webseite.</p>")),
                   0.5);
  EXPECT_DOUBLE_EQ(english_ratio(clean_html("<p>You agree to the terms of this site.</p><p>   </p>")), 1.0);
}

TEST(Language, NonEnglishPageRejected) {
  const auto out = extract_page("<p>Diese Bedingungen gelten für alle Nutzer.</p><p>Wir speichern keine Daten.</p>", "de");
  EXPECT_FALSE(out.document);
  EXPECT_FALSE(out.rejection.empty());
}

TEST(Links, TargetPhrases) {
  EXPECT_TRUE(match_tos_link("Terms of Service"));
  EXPECT_TRUE(match_tos_link("Terms & Conditions"));
  EXPECT_TRUE(match_tos_link("terms of use"));
  EXPECT_FALSE(match_tos_link("Privacy Policy"));
  EXPECT_FALSE(match_tos_link(""));
}

TEST(Links, PrivacyPolicyBelowThreshold) {
  double best = 0;
  for (const char* t : {"Terms of Service", "Terms of Use", "Terms and Conditions", "Conditions of Use"})
    best = std::max(best, normalized_similarity("Privacy Policy", t));
  EXPECT_LT(best, 0.75);
}

TEST(Links, CaseSymmetry) {
  Rng rng(11);
  const std::string alphabet = "TERMSofServiceAndConditionsUse &";
  for (int i = 0; i < 300; ++i) {
    std::string s;
    const std::size_t len = 5 + rng.below(20);
    for (std::size_t j = 0; j < len; ++j) s += alphabet[rng.below(alphabet.size())];
    EXPECT_EQ(match_tos_link(s), match_tos_link(text::to_lower(s))) << s;
  }
  EXPECT_EQ(match_tos_link("TERMS OF USE"), match_tos_link("terms of use"));
}

TEST(Levenshtein, Basics) {
  EXPECT_EQ(levenshtein(U"kitten", U"sitting"), 3u);
  EXPECT_EQ(levenshtein(U"", U"abc"), 3u);
  EXPECT_DOUBLE_EQ(normalized_similarity("", ""), 1.0);
}

TEST(Enumeration, Examples) {
  auto a = recognize_enumeration("Section 3. Liability");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->kind, EnumKind::latin_number);
  EXPECT_EQ(a->prefix, EnumPrefix::section);
  EXPECT_EQ(a->raw, "Section 3.");
  auto b = recognize_enumeration("iv. Warranty");
  ASSERT_TRUE(b);
  EXPECT_EQ(b->kind, EnumKind::roman_numeral);
  EXPECT_FALSE(b->prefix);
  EXPECT_FALSE(recognize_enumeration("Generally speaking..."));
  EXPECT_EQ(recognize_enumeration("v) x")->kind, EnumKind::roman_numeral);
  EXPECT_EQ(recognize_enumeration("B: Fees")->kind, EnumKind::letter);
  EXPECT_EQ(recognize_enumeration("Article IV Payment")->raw, "Article IV");
  EXPECT_FALSE(recognize_enumeration("3 Liability"));
  EXPECT_FALSE(recognize_enumeration("3.5 percent"));
}

TEST(Enumeration, AgreesWithRegexTableOnFuzz) {
  Rng rng(2024);
  const std::vector<std::string> prefixes = {"", "", "", "Section ", "section  ", "PART ", "Article\t", "Sect ", "Parts ", "Articles "};
  const std::vector<std::string> markers = {"1", "12", "007", "i", "ii", "iii", "iv", "v", "vi", "ix", "x", "xiv", "xxxix",
                                            "xl", "iiii", "vx", "IV", "Xii", "a", "B", "z", "ab", "c3", "", "l", "M"};
  const std::vector<std::string> delims = {".", ")", ":", "", ";", ",", "-", ".."};
  const std::vector<std::string> tails = {" Liability", "", "\tterms", "x", " ", "5", "  a"};
  const std::vector<std::string> leads = {"", "", " ", "\t "};
  for (int i = 0; i < 500; ++i) {
    const std::string s = leads[rng.below(leads.size())] + prefixes[rng.below(prefixes.size())] +
                          markers[rng.below(markers.size())] + delims[rng.below(delims.size())] +
                          tails[rng.below(tails.size())];
    const auto got = recognize_enumeration(s);
    const auto want = oracle::recognize_enumeration(s);
    ASSERT_EQ(got.has_value(), want.has_value()) << '"' << s << '"';
    if (!got) continue;
    EXPECT_EQ(got->kind, want->kind) << s;
    EXPECT_EQ(got->prefix, want->prefix) << s;
    EXPECT_EQ(got->raw, want->raw) << s;
  }
}

TEST(SplitRules, PriorityOrder) {
  const auto rules = default_split_rules();
  ASSERT_EQ(rules.size(), 5u);
  const SplitSelector order[] = {SplitSelector::heading, SplitSelector::bold_enum, SplitSelector::list_item,
                                 SplitSelector::underline_enum, SplitSelector::paragraph_enum};
  for (std::size_t i = 0; i < rules.size(); ++i) {
    EXPECT_EQ(rules[i].selector, order[i]);
    EXPECT_EQ(rules[i].min_occurrences, 5u);
    if (i) EXPECT_LT(rules[i - 1].priority, rules[i].priority);
  }
}

TEST(SplitRules, DuplicatePriorityRejected) {
  const auto tree = clean_html("<p>some text that is here</p>");
  EXPECT_THROW(extract_sections(tree, {{1, SplitSelector::heading, 5}, {1, SplitSelector::bold_enum, 5}}), ValidationError);
}

TEST(Sections, NoActiveRuleGivesSingleSection) {
  const auto d = extract_sections(clean_html("<p>one paragraph of text.</p><p>another one.</p>"), default_split_rules(), "x");
  ASSERT_EQ(d.sections.size(), 1u);
  EXPECT_EQ(d.sections[0].heading_path, std::vector<std::string>{""});
  EXPECT_EQ(d.sections[0].paragraphs.size(), 2u);
}

TEST(Sections, HeadingsOnlyFixture) {
  const auto out = extract_page(slurp(kFixtures / "html/headings_only.html"), "headings_only");
  ASSERT_TRUE(out.document);
  ASSERT_EQ(out.document->sections.size(), 6u);
  for (const auto& s : out.document->sections) EXPECT_EQ(s.heading_path.size(), 1u);
  EXPECT_EQ(out.document->sections[1].heading_path[0], "Privacy");
  EXPECT_EQ(out.document->source_url, "https://example.com/terms");
}

TEST(Sections, BelowThresholdFallsThrough) {
  const auto tree = clean_html(slurp(kFixtures / "html/below_threshold.html"));
  const auto blocks = text_blocks(tree);
  EXPECT_EQ(count_matches(blocks, SplitSelector::heading), 3u);
  EXPECT_EQ(count_matches(blocks, SplitSelector::paragraph_enum), 5u);
  const auto d = extract_sections(tree, default_split_rules(), "x");
  for (const auto& s : d.sections)
    for (const auto& h : s.heading_path) EXPECT_NE(h, "Payments");
}

TEST(Sections, BoldEnumFixtureHasFiveSplits) {
  const auto out = extract_page(slurp(kFixtures / "html/bold_enum.html"), "bold_enum");
  ASSERT_TRUE(out.document);
  std::size_t enumerated = 0;
  for (const auto& s : out.document->sections) enumerated += recognize_enumeration(s.heading_path.back()).has_value();
  EXPECT_EQ(enumerated, 5u);
}

TEST(Sections, FixturesMatchExpectedRecords) {
  for (const auto& name : fixture_names()) {
    const auto out = extract_page(slurp(kFixtures / "html" / (name + ".html")), name);
    ASSERT_TRUE(out.document) << name;
    std::string expected = slurp(kFixtures / "expected" / (name + ".jsonl"));
    while (!expected.empty() && expected.back() == '\n') expected.pop_back();
    EXPECT_EQ(corpus::document_to_json_line(*out.document), expected) << name;
  }
}

TEST(Sections, NeverDropsText) {
  for (const auto& name : fixture_names()) {
    const auto tree = clean_html(slurp(kFixtures / "html" / (name + ".html")));
    const auto d = extract_sections(tree, default_split_rules(), name);
    std::string out;
    std::vector<std::string> prev;
    for (const auto& s : d.sections) {
      bool fresh = false;
      for (std::size_t i = 0; i < s.heading_path.size(); ++i) {
        fresh = fresh || i >= prev.size() || prev[i] != s.heading_path[i];
        if (fresh) out += s.heading_path[i] + " ";
      }
      prev = s.heading_path;
      for (const auto& p : s.paragraphs) out += p + " ";
    }
    std::string in;
    for (const auto& b : text_blocks(tree)) in += b.text + " ";
    EXPECT_EQ(words(out), words(in)) << name;
  }
}

TEST(Sections, JsonRoundTripIsIdentity) {
  for (const auto& name : fixture_names()) {
    const auto out = extract_page(slurp(kFixtures / "html" / (name + ".html")), name);
    ASSERT_TRUE(out.document);
    std::stringstream ss;
    corpus::Corpus c;
    c.documents.push_back(*out.document);
    corpus::write_corpus(ss, c);
    const auto back = corpus::read_corpus(ss);
    ASSERT_EQ(back.documents.size(), 1u);
    EXPECT_EQ(back.documents[0], *out.document) << name;
  }
}
