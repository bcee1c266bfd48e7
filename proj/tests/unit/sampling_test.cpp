#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "topseg/error.hpp"
#include "topseg/random.hpp"
#include "topseg/sampling.hpp"

using namespace topseg;
using namespace topseg::sampling;

namespace {

// Each document holds one section per topic.
corpus::Corpus two_topic_corpus(std::size_t docs) {
  corpus::Corpus c;
  for (std::size_t i = 0; i < docs; ++i)
    c.documents.push_back(oracle::make_document("d" + std::to_string(i), {2, 2}, {"privacy", "fees"}));
  return c;
}

std::pair<std::size_t, std::size_t> counts(const std::vector<PairExample>& pairs) {
  std::size_t pos = 0, neg = 0;
  for (const auto& p : pairs) (p.label ? pos : neg)++;
  return {pos, neg};
}

std::string key(const Chunk& c) {
  return c.doc_id + "/" + std::to_string(c.section) + "/" + (c.paragraph ? std::to_string(*c.paragraph) : "-");
}

void expect_unique_unordered(const std::vector<PairExample>& pairs) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : pairs) {
    auto a = key(p.a), b = key(p.b);
    if (b < a) std::swap(a, b);
    EXPECT_NE(a, b);
    EXPECT_TRUE(seen.insert({a, b}).second) << a << " " << b;
  }
}

}  // namespace

TEST(SectionPairs, BalancedCounts) {
  const auto r = sample_section_pairs(two_topic_corpus(10), {Strategy::S, 3, 3, 1});
  EXPECT_EQ(r.pairs.size(), 120u);
  EXPECT_EQ(counts(r.pairs), (std::pair<std::size_t, std::size_t>{60, 60}));
  EXPECT_TRUE(r.flagged.empty());
  expect_unique_unordered(r.pairs);
  for (const auto& p : r.pairs) {
    EXPECT_NE(p.a.doc_id, p.b.doc_id);
    EXPECT_EQ(p.label == 1, p.a.topic_id == p.b.topic_id);
    EXPECT_EQ(p.a.kind, ChunkKind::section);
    EXPECT_EQ(p.pair_id.rfind("S-", 0), 0u);
  }
}

TEST(SectionPairs, SingletonTopicFlagged) {
  auto c = two_topic_corpus(10);
  c.documents.push_back(oracle::make_document("lonely", {1}, {"warranty"}));
  const auto r = sample_section_pairs(c, {Strategy::S, 3, 3, 1});
  ASSERT_EQ(r.flagged.size(), 1u);
  EXPECT_EQ(r.flagged[0].doc_id, "lonely");
  EXPECT_EQ(r.flagged[0].positives, 0u);
}

TEST(SectionPairs, Deterministic) {
  const auto c = two_topic_corpus(8);
  EXPECT_EQ(sample_section_pairs(c, {Strategy::S, 3, 3, 4}).pairs, sample_section_pairs(c, {Strategy::S, 3, 3, 4}).pairs);
  EXPECT_NE(sample_section_pairs(c, {Strategy::S, 3, 3, 4}).pairs, sample_section_pairs(c, {Strategy::S, 3, 3, 5}).pairs);
}

TEST(SectionPairs, UnlabeledNamesAssignTopics) {
  corpus::Corpus c;
  c.documents.push_back(oracle::make_document("a", {1, 1}));
  c.documents.push_back(oracle::make_document("b", {1, 1}));
  try {
    sample_section_pairs(c, {Strategy::S, 3, 3, 0});
    FAIL();
  } catch (const MissingArtifactError& e) {
    EXPECT_NE(std::string(e.what()).find("assign-topics"), std::string::npos);
  }
}

TEST(ParagraphPairs, BalancedAndInheritTopic) {
  const auto r = sample_random_paragraph_pairs(two_topic_corpus(10), {Strategy::RP, 3, 3, 2});
  const auto [pos, neg] = counts(r.pairs);
  EXPECT_EQ(pos, neg);
  EXPECT_EQ(pos, 40u * 3u);
  expect_unique_unordered(r.pairs);
  for (const auto& p : r.pairs) {
    EXPECT_NE(p.a.doc_id, p.b.doc_id);
    ASSERT_TRUE(p.a.paragraph);
    EXPECT_EQ(p.label == 1, p.a.topic_id == p.b.topic_id);
  }
}

TEST(ParagraphPairs, OnlyDocumentWithTopicFlagged) {
  auto c = two_topic_corpus(10);
  c.documents.push_back(oracle::make_document("solo", {2}, {"warranty"}));
  const auto r = sample_random_paragraph_pairs(c, {Strategy::RP, 3, 3, 2});
  std::size_t solo = 0;
  for (const auto& f : r.flagged) {
    EXPECT_EQ(f.doc_id, "solo");
    EXPECT_EQ(f.positives, 0u);
    ++solo;
  }
  EXPECT_EQ(solo, 2u);
}

TEST(ConsecutivePairs, ForcedMembership) {
  corpus::Corpus c;
  c.documents.push_back(oracle::make_document("d", {3, 2}));
  const auto r = sample_consecutive_pairs(c, {Strategy::CP, 3, 3, 0});
  std::set<std::pair<std::size_t, std::size_t>> pos, neg;
  const auto flat = [](const Chunk& ch) { return ch.section * 3 + *ch.paragraph; };
  for (const auto& p : r.pairs) (p.label ? pos : neg).insert({flat(p.a), flat(p.b)});
  EXPECT_EQ(pos, (std::set<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {3, 4}}));
  EXPECT_EQ(neg.size(), 3u);
  EXPECT_TRUE(neg.count({2, 3}));
  const std::set<std::pair<std::size_t, std::size_t>> cross = {{0, 3}, {0, 4}, {1, 3}, {1, 4}, {2, 4}};
  for (const auto& n : neg)
    if (n != std::pair<std::size_t, std::size_t>{2, 3}) EXPECT_TRUE(cross.count(n));
  EXPECT_TRUE(r.flagged.empty());
}

TEST(ConsecutivePairs, NeverCrossDocument) {
  const auto r = sample_consecutive_pairs(two_topic_corpus(6), {Strategy::CP, 3, 3, 3});
  for (const auto& p : r.pairs) EXPECT_EQ(p.a.doc_id, p.b.doc_id);
}

TEST(ConsecutivePairs, BalanceByEnumeration) {
  Rng rng(77);
  for (int t = 0; t < 50; ++t) {
    std::vector<std::size_t> sizes;
    for (std::size_t s = 0, n = 1 + rng.below(4); s < n; ++s) sizes.push_back(1 + rng.below(4));
    corpus::Corpus c;
    c.documents.push_back(oracle::make_document("d", sizes));
    // enumerate every pair i < j
    std::size_t positives = 0, boundaries = 0, cross = 0;
    std::vector<std::size_t> sec;
    for (std::size_t s = 0; s < sizes.size(); ++s) sec.insert(sec.end(), sizes[s], s);
    for (std::size_t i = 0; i < sec.size(); ++i)
      for (std::size_t j = i + 1; j < sec.size(); ++j) {
        if (j == i + 1 && sec[i] == sec[j]) ++positives;
        else if (j == i + 1) ++boundaries;
        else if (sec[i] != sec[j]) ++cross;
      }
    if (positives == 0 && boundaries == 0) {
      EXPECT_THROW(sample_consecutive_pairs(c, {Strategy::CP, 3, 3, 0}), ValidationError);
      continue;
    }
    const auto r = sample_consecutive_pairs(c, {Strategy::CP, 3, 3, static_cast<std::uint64_t>(t)});
    const auto [pos, neg] = counts(r.pairs);
    EXPECT_EQ(pos, positives);
    EXPECT_EQ(neg, std::max(boundaries, std::min(positives, boundaries + cross)));
    if (boundaries + cross >= positives && boundaries <= positives) {
      EXPECT_EQ(pos, neg);
      EXPECT_TRUE(r.flagged.empty());
    } else if (positives > 0) {
      EXPECT_EQ(r.flagged.size(), 1u);
    }
    expect_unique_unordered(r.pairs);
  }
}

TEST(PairsJson, RoundTripAndSchema) {
  const auto r = sample_consecutive_pairs(two_topic_corpus(3), {Strategy::CP, 3, 3, 0});
  std::stringstream ss;
  write_pairs(ss, r.pairs);
  const auto back = read_pairs(ss);
  ASSERT_EQ(back.size(), r.pairs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].pair_id, r.pairs[i].pair_id);
    EXPECT_EQ(back[i].label, r.pairs[i].label);
    EXPECT_EQ(back[i].a.text, r.pairs[i].a.text);
    EXPECT_EQ(back[i].b.paragraph, r.pairs[i].b.paragraph);
  }
  const auto line = pair_to_json_line(r.pairs.front());
  EXPECT_EQ(line.rfind(R"({"pair_id":"CP-)", 0), 0u);
  std::stringstream dup;
  dup << line << "\n" << line << "\n";
  EXPECT_THROW(read_pairs(dup), ValidationError);
}
