#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "topseg/corpus.hpp"
#include "topseg/error.hpp"

using namespace topseg;
using namespace topseg::corpus;

namespace {

Corpus corpus_of(std::size_t n) {
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) c.documents.push_back(oracle::make_document("doc-" + std::to_string(i), {2, 3}));
  return c;
}

}  // namespace

TEST(Corpus, ReadsTwoRecords) {
  std::stringstream ss;
  ss << document_to_json_line(oracle::make_document("a", {1})) << "\n"
     << document_to_json_line(oracle::make_document("b", {2, 1})) << "\n";
  EXPECT_EQ(read_corpus(ss).documents.size(), 2u);
}

TEST(Corpus, EmptySectionIsValidationError) {
  std::stringstream ss(R"({"id":"x","source_url":null,"sections":[{"heading_path":["h"],"topic_id":null,"paragraphs":[]}]})");
  EXPECT_THROW(read_corpus(ss), ValidationError);
}

TEST(Corpus, DuplicateIdCitesLine) {
  std::stringstream ss;
  ss << document_to_json_line(oracle::make_document("doc-1", {1})) << "\n"
     << document_to_json_line(oracle::make_document("doc-2", {1})) << "\n"
     << document_to_json_line(oracle::make_document("doc-1", {1})) << "\n";
  try {
    read_corpus(ss);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(Corpus, MalformedLineIsParseErrorWithLine) {
  std::stringstream ss;
  ss << document_to_json_line(oracle::make_document("a", {1})) << "\n{not json\n";
  try {
    read_corpus(ss);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Corpus, JsonKeyOrderAndRoundTrip) {
  auto d = oracle::make_document("a", {2}, {"privacy"});
  d.source_url = "https://example.com/tos";
  const auto line = document_to_json_line(d);
  EXPECT_EQ(line.rfind(R"({"id":"a","source_url":"https://example.com/tos","sections":[{"heading_path")", 0), 0u);
  EXPECT_EQ(document_from_json_line(line), d);
}

TEST(Corpus, SplitSizesExact) {
  const auto parts = split_corpus(corpus_of(10), {}, 7);
  EXPECT_EQ(parts.train.documents.size(), 8u);
  EXPECT_EQ(parts.dev.documents.size(), 1u);
  EXPECT_EQ(parts.test.documents.size(), 1u);
  EXPECT_EQ(parts.train.split_tag, SplitTag::train);
}

TEST(Corpus, SplitFloorRule43) {
  const auto parts = split_corpus(corpus_of(43), {}, 1);
  EXPECT_EQ(parts.dev.documents.size(), 4u);
  EXPECT_EQ(parts.test.documents.size(), 4u);
  EXPECT_EQ(parts.train.documents.size(), 35u);
}

TEST(Corpus, SplitDeterministicAndDisjoint) {
  const auto c = corpus_of(30);
  const auto a = split_corpus(c, {}, 5);
  const auto b = split_corpus(c, {}, 5);
  EXPECT_EQ(a.train.documents, b.train.documents);
  EXPECT_EQ(a.test.documents, b.test.documents);
  std::set<std::string> ids;
  for (const auto* part : {&a.train, &a.dev, &a.test})
    for (const auto& d : part->documents) EXPECT_TRUE(ids.insert(d.id).second);
  EXPECT_EQ(ids.size(), 30u);
}

TEST(Corpus, SplitRejectsBadInput) {
  EXPECT_THROW(split_corpus(corpus_of(2), {}, 0), ValidationError);
  EXPECT_THROW(split_corpus(corpus_of(10), {0.5, 0.1, 0.1}, 0), ValidationError);
  auto tagged = corpus_of(10);
  tagged.split_tag = SplitTag::train;
  EXPECT_THROW(split_corpus(tagged, {}, 0), ValidationError);
}

TEST(Corpus, StatsMeansAndHistogram) {
  Corpus c;
  c.documents.push_back(oracle::make_document("a", {1, 1, 1}, {"privacy", "privacy", "privacy"}));
  c.documents.push_back(oracle::make_document("b", {1, 2, 1, 1}, {"privacy", "privacy", "privacy", "privacy"}));
  const auto s = corpus_stats(c);
  EXPECT_EQ(s.doc_count, 2u);
  EXPECT_DOUBLE_EQ(s.mean_sections_per_doc, 3.5);
  EXPECT_DOUBLE_EQ(s.mean_paragraphs_per_doc, 4.0);
  ASSERT_EQ(s.topic_histogram.size(), 1u);
  EXPECT_EQ(s.topic_histogram.at("privacy"), 7u);
}

TEST(Corpus, ParagraphRefsAndFilter) {
  const auto d = oracle::make_document("a", {2, 1});
  const auto refs = paragraph_refs(d);
  ASSERT_EQ(refs.size(), 3u);
  EXPECT_EQ(refs[2], (ParagraphRef{1, 0}));
  Corpus c;
  c.documents = {d, oracle::make_document("b", {1})};
  EXPECT_EQ(filter_min_paragraphs(c, 2).documents.size(), 1u);
}
