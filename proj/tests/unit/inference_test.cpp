#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "oracles.hpp"
#include "topseg/error.hpp"
#include "topseg/inference.hpp"

using namespace topseg;
using namespace topseg::inference;

namespace {

// Returns fixed probabilities keyed by pair id.
class TableScorer final : public scorers::PairScorer {
public:
  explicit TableScorer(std::map<std::string, double> p) : p_(std::move(p)) {}
  double score(const sampling::Chunk&, const sampling::Chunk&, std::string_view id) const override {
    return p_.at(std::string(id));
  }
  std::string name() const override { return "table"; }

private:
  std::map<std::string, double> p_;
};

Segmentation seg(std::vector<int> labels, std::string scorer = "m") {
  Segmentation s;
  s.doc_id = "d";
  s.labels = std::move(labels);
  s.scorer = std::move(scorer);
  return s;
}

}  // namespace

TEST(Reference, LabelsFromSections) {
  const auto d = oracle::make_document("d", {2, 1, 3});
  EXPECT_EQ(reference_segmentation(d).labels, (std::vector<int>{1, 0, 0, 1, 1}));
  const auto pairs = adjacent_pairs(d);
  ASSERT_EQ(pairs.size(), 5u);
  EXPECT_EQ(pairs[2].pair_id, "d#2");
  EXPECT_EQ(pairs[1].label, 0);
}

TEST(Segment, KMinusOnePredictionsAndThreshold) {
  const auto d = oracle::make_document("d", {5});
  const TableScorer sc({{"d#0", 0.9}, {"d#1", 0.4}, {"d#2", 0.6}, {"d#3", 0.2}});
  const auto s = segment_document(d, sc);
  EXPECT_EQ(s.labels, (std::vector<int>{1, 0, 1, 0}));
  ASSERT_TRUE(s.probs);
  EXPECT_EQ(s.probs->size(), 4u);
  const auto ranges = to_sections(s);
  EXPECT_EQ(ranges, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {2, 3}, {4, 4}}));
}

TEST(Segment, HalfIsSameTopic) {
  const auto d = oracle::make_document("d", {2});
  EXPECT_EQ(segment_document(d, TableScorer({{"d#0", 0.5}})).labels, std::vector<int>{1});
  EXPECT_THROW(segment_document(d, TableScorer({{"d#0", 0.5}}), {1.0}), ValidationError);
}

TEST(Segment, CorpusParallelMatchesSequential) {
  corpus::Corpus c;
  std::map<std::string, double> probs;
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    auto d = oracle::make_document("doc" + std::to_string(i), {2, 3});
    for (const auto& p : adjacent_pairs(d)) probs[p.pair_id] = rng.uniform();
    c.documents.push_back(d);
  }
  const TableScorer sc(probs);
  const auto par = segment_corpus(c, sc, {}, 4);
  for (std::size_t i = 0; i < c.documents.size(); ++i) EXPECT_EQ(par[i].labels, segment_document(c.documents[i], sc).labels);
}

TEST(Oracle, RateAndDeterminism) {
  const auto d = oracle::make_document("d", {5, 5, 5, 5});
  EXPECT_EQ(random_oracle_segment(d, 3).labels, random_oracle_segment(d, 3).labels);
  double total = 0;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s)
    for (int y : random_oracle_segment(d, static_cast<std::uint64_t>(s)).labels) total += y == 0;
  const double mean = total / draws;
  EXPECT_NEAR(mean, 19 * 0.2, 0.15);
  const double sigma = std::sqrt(19 * 0.2 * 0.8 / draws);
  EXPECT_LT(std::abs(mean - 3.8), 3 * sigma);
}

TEST(Ensemble, Majority) {
  std::vector<Segmentation> runs = {seg({1, 0}), seg({1, 0}), seg({0, 1})};
  EXPECT_EQ(ensemble_majority(runs).labels, (std::vector<int>{1, 0}));
  std::vector<Segmentation> tie = {seg({1}), seg({0})};
  EXPECT_EQ(ensemble_majority(tie).labels, std::vector<int>{1});
  std::vector<Segmentation> same(5, seg({1, 0, 1}));
  const auto e = ensemble_majority(same);
  EXPECT_EQ(e.labels, (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(e.scorer, "m+ens");
  EXPECT_EQ(e.seed, -1);
  std::vector<Segmentation> bad = {seg({1}), seg({1, 0})};
  EXPECT_THROW(ensemble_majority(bad), ValidationError);
}

TEST(Sections, Decomposition) {
  EXPECT_EQ(to_sections(seg({1, 1, 1})).size(), 1u);
  EXPECT_EQ(to_sections(seg({0, 0, 0})).size(), 4u);
  EXPECT_THROW(to_sections(seg({1}), oracle::make_document("d", {3})), ValidationError);
}

TEST(SegmentationJson, RoundTrip) {
  auto s = seg({1, 0});
  s.probs = std::vector<double>{0.75, 0.125};
  s.seed = 4;
  std::vector<Segmentation> v = {s};
  std::stringstream ss;
  write_segmentations(ss, v);
  const auto back = read_segmentations(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].labels, s.labels);
  EXPECT_EQ(back[0].probs, s.probs);
  EXPECT_EQ(back[0].seed, 4);
  EXPECT_EQ(segmentation_to_json_line(s).rfind(R"({"doc_id":"d","labels":[1,0],"probs":)", 0), 0u);
}
