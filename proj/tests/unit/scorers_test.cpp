#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "topseg/error.hpp"
#include "topseg/random.hpp"
#include "topseg/scorers.hpp"

using namespace topseg;
using namespace topseg::scorers;
using sampling::Chunk;

namespace {

Chunk chunk(const std::string& text, const std::string& doc = "d", std::size_t section = 0) {
  Chunk c;
  c.doc_id = doc;
  c.section = section;
  c.paragraph = 0;
  c.text = text;
  return c;
}

sampling::PairExample pair(const std::string& id, const std::string& a, const std::string& b, int label) {
  return {id, chunk(a), chunk(b), label, sampling::Strategy::CP};
}

double embedding_value(const Embedding& e, std::uint32_t i) {
  for (auto [k, v] : e.sparse)
    if (k == i) return v;
  return 0.0;
}

}  // namespace

TEST(Vocabulary, IdfValues) {
  const std::vector<Chunk> chunks = {chunk("alpha beta"), chunk("alpha gamma"), chunk("alpha")};
  const auto v = fit_vocabulary(chunks, true);
  ASSERT_TRUE(v.idf);
  EXPECT_DOUBLE_EQ((*v.idf)[*v.find("alpha")], 1.0);
  EXPECT_NEAR((*v.idf)[*v.find("beta")], std::log(4.0 / 2.0) + 1.0, 1e-12);
  EXPECT_NEAR((*v.idf)[*v.find("beta")], 1.6931, 1e-4);
}

TEST(Vocabulary, MinDfDropsHapax) {
  const std::vector<Chunk> chunks = {chunk("alpha beta"), chunk("alpha gamma")};
  const auto v = fit_vocabulary(chunks, false, 2);
  EXPECT_EQ(v.size(), 1u);
  EXPECT_TRUE(v.find("alpha"));
  EXPECT_FALSE(v.find("beta"));
}

TEST(Embed, BowCounts) {
  ScorerModel m;
  m.kind = ScorerKind::bow;
  m.vocabulary = fit_vocabulary(std::vector<Chunk>{chunk("a b")}, false);
  const auto e = m.embed(tokenize("a a b"));
  EXPECT_DOUBLE_EQ(embedding_value(e, *m.vocabulary->find("a")), 2.0);
  EXPECT_DOUBLE_EQ(embedding_value(e, *m.vocabulary->find("b")), 1.0);
}

TEST(Embed, TfidfUnitOrZeroNorm) {
  ScorerModel m;
  m.kind = ScorerKind::tfidf;
  m.vocabulary = fit_vocabulary(std::vector<Chunk>{chunk("a b c"), chunk("a d")}, true);
  EXPECT_NEAR(m.embed(tokenize("a b b d")).norm(), 1.0, 1e-12);
  const auto oov = m.embed(tokenize("zzz"));
  EXPECT_DOUBLE_EQ(oov.norm(), 0.0);
  EXPECT_TRUE(oov.oov_only);
}

TEST(Embed, GloveSingleton) {
  auto table = std::make_shared<WordVectorTable>(3);
  table->add("cat", {1.0, 2.0, 3.0});
  table->add("dog", {0.0, 1.0, 0.0});
  ScorerModel m;
  m.kind = ScorerKind::glove_avg;
  m.mode = FeatureMode::dense_concat;
  m.vectors = table;
  const auto e = m.embed(tokenize("cat"));
  EXPECT_EQ(e.dense, (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(m.embed(tokenize("cat dog")).dense, (std::vector<double>{0.5, 1.5, 1.5}));
}

TEST(WordVectors, LoadAndDimensionMismatch) {
  const auto dir = std::filesystem::temp_directory_path() / "topseg_wv_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "ok.txt") << "2 2\ncat 0.1 0.2\ndog 0.3 0.4\n";
    std::ofstream(dir / "bad.txt") << "cat 0.1 0.2\ndog 0.3\n";
  }
  const auto t = WordVectorTable::load(dir / "ok.txt");
  EXPECT_EQ(t.dimension(), 2u);
  EXPECT_EQ(t.size(), 2u);
  try {
    WordVectorTable::load(dir / "bad.txt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(WordVectorTable::load(dir / "missing.txt"), MissingArtifactError);
}

TEST(Features, IdentityAndOrthogonal) {
  Embedding u;
  u.dimension = 2;
  u.sparse = {{0, 1.0}, {1, 2.0}};
  u.token_count = 3;
  const auto f = pair_features(u, u, FeatureMode::sparse_sim);
  ASSERT_EQ(f.values.size(), 3u);
  for (double x : f.values) EXPECT_DOUBLE_EQ(x, 1.0);

  Embedding a, b;
  a.dimension = b.dimension = 2;
  a.is_dense = b.is_dense = true;
  a.dense = {1, 0};
  b.dense = {0, 1};
  const auto g = pair_features(a, b, FeatureMode::dense_concat);
  ASSERT_EQ(g.values.size(), 6u);
  EXPECT_DOUBLE_EQ(g.values[4], 1.0);
  EXPECT_DOUBLE_EQ(g.values[5], 1.0);
  Embedding sa = a, sb = b;
  EXPECT_DOUBLE_EQ(pair_features(sa, sb, FeatureMode::sparse_sim).values[0], 0.0);
}

TEST(Features, EmptyInputs) {
  Embedding e;
  e.dimension = 3;
  const auto f = pair_features(e, e, FeatureMode::sparse_sim);
  EXPECT_EQ(f.values, (std::vector<double>{0.0, 0.0, 0.0}));
}

TEST(Truncate, ForcedCases) {
  auto make = [](std::size_t n) { return std::vector<std::string>(n, "t"); };
  auto [a, b] = truncate_pair(make(600), make(100), 512);
  EXPECT_EQ(a.size(), 412u);
  EXPECT_EQ(b.size(), 100u);
  auto [c, d] = truncate_pair(make(300), make(300), 512);
  EXPECT_EQ(c.size(), 256u);
  EXPECT_EQ(d.size(), 256u);
  auto [e, f] = truncate_pair(make(10), make(10), 512);
  EXPECT_EQ(e.size() + f.size(), 20u);
  EXPECT_THROW(truncate_pair(make(3), make(3), 1), ValidationError);
}

TEST(Truncate, PropertyAgainstIterativeOracle) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t la = rng.below(800), lb = rng.below(800), budget = 2 + rng.below(1100);
    std::vector<std::string> a(la), b(lb);
    for (std::size_t j = 0; j < la; ++j) a[j] = "a" + std::to_string(j);
    for (std::size_t j = 0; j < lb; ++j) b[j] = "b" + std::to_string(j);
    const auto [ta, tb] = truncate_pair(a, b, budget);
    const auto [wa, wb] = oracle::truncate_lengths(la, lb, budget);
    ASSERT_EQ(ta.size(), wa) << la << " " << lb << " " << budget;
    ASSERT_EQ(tb.size(), wb);
    EXPECT_LE(ta.size() + tb.size(), std::max(budget, std::size_t{0}));
    EXPECT_TRUE(std::equal(ta.begin(), ta.end(), a.begin()));
    EXPECT_TRUE(std::equal(tb.begin(), tb.end(), b.begin()));
  }
}

TEST(Logistic, ZeroModelPredictsHalf) {
  LogisticModel m;
  m.weights = {0, 0, 0};
  EXPECT_DOUBLE_EQ(m.predict(std::vector<double>{3, -1, 7}), 0.5);
  EXPECT_DOUBLE_EQ(sigmoid(0), 0.5);
  EXPECT_GT(sigmoid(800), 0.99);
  EXPECT_LT(sigmoid(-800), 0.01);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  Rng rng(13);
  std::vector<LabeledFeatures> data;
  for (int i = 0; i < 40; ++i) {
    LabeledFeatures ex;
    for (int j = 0; j < 4; ++j) ex.features.values.push_back(rng.uniform() * 2 - 1);
    ex.label = rng.bernoulli(0.5);
    data.push_back(ex);
  }
  const double l2 = 0.01, h = 1e-5;
  for (int point = 0; point < 20; ++point) {
    LogisticModel m;
    for (int j = 0; j < 4; ++j) m.weights.push_back(rng.uniform() * 4 - 2);
    m.bias = rng.uniform() * 2 - 1;
    std::vector<double> gw;
    double gb = 0;
    logistic_loss(m, data, l2, &gw, &gb);
    for (std::size_t j = 0; j <= m.weights.size(); ++j) {
      auto plus = m, minus = m;
      double& p = j < m.weights.size() ? plus.weights[j] : plus.bias;
      double& q = j < m.weights.size() ? minus.weights[j] : minus.bias;
      p += h;
      q -= h;
      const double numeric = (logistic_loss(plus, data, l2) - logistic_loss(minus, data, l2)) / (2 * h);
      const double analytic = j < m.weights.size() ? gw[j] : gb;
      EXPECT_LT(std::abs(numeric - analytic) / std::max(1e-8, std::max(std::abs(numeric), std::abs(analytic))), 1e-4);
    }
  }
}

TEST(Logistic, SeparableToyReachesFullAccuracy) {
  std::vector<LabeledFeatures> data;
  for (int i = 0; i < 20; ++i) {
    const int y = i % 2;
    data.push_back({{{y ? 1.0 : 0.0, y ? 1.0 : 0.0, 1.0}, FeatureMode::sparse_sim}, y});
  }
  const auto m = train_logistic(data, {});
  for (const auto& ex : data) EXPECT_EQ(m.predict(ex.features.values) >= 0.5, ex.label == 1);
  EXPECT_LT(m.meta.final_loss, m.meta.initial_loss);
}

TEST(Logistic, SingleClassRejected) {
  std::vector<LabeledFeatures> data(3, {{{1.0}, FeatureMode::sparse_sim}, 1});
  EXPECT_THROW(train_logistic(data, {}), ValidationError);
}

TEST(Scorer, SymmetricBoundedAndPersisted) {
  const std::vector<Chunk> train = {chunk("fees payment billing due"), chunk("privacy data cookies"),
                                    chunk("fees billing refund"), chunk("privacy personal data")};
  const std::vector<sampling::PairExample> pairs = {
      pair("1", "fees payment billing", "fees billing refund", 1), pair("2", "privacy data cookies", "privacy personal data", 1),
      pair("3", "fees payment billing", "privacy data cookies", 0), pair("4", "fees billing refund", "privacy personal data", 0)};
  const auto m = train_scorer({}, train, pairs, {});
  EXPECT_EQ(m.name(), "tfidf");
  EXPECT_EQ(m.token_budget, kSingleEncoderBudget);
  const auto a = chunk("fees billing"), b = chunk("privacy cookies fees");
  const double s = m.score(a, b);
  EXPECT_GE(s, 0.0);
  EXPECT_LE(s, 1.0);
  EXPECT_DOUBLE_EQ(s, m.score(b, a));
  EXPECT_GT(m.score(a, a), m.score(a, chunk("privacy cookies")));
  EXPECT_DOUBLE_EQ(pair_accuracy(m, pairs), 1.0);

  const auto back = ScorerModel::from_json(m.to_json());
  EXPECT_DOUBLE_EQ(back.score(a, b), s);
  EXPECT_EQ(back.to_json(), m.to_json());
}

TEST(Scorer, DenseConcatNeedsVectors) {
  ScorerSpec spec;
  spec.kind = ScorerKind::tfidf;
  spec.mode = FeatureMode::dense_concat;
  const std::vector<Chunk> train = {chunk("a b")};
  const std::vector<sampling::PairExample> pairs = {pair("1", "a", "a", 1), pair("2", "a", "b", 0)};
  EXPECT_THROW(train_scorer(spec, train, pairs, {}), ValidationError);
}

TEST(ExternalScores, RoundTripAndValidation) {
  std::vector<sampling::PairExample> pairs;
  std::stringstream ss;
  for (int i = 0; i < 10; ++i) {
    pairs.push_back(pair("p" + std::to_string(i), "a", "b", 1));
    ss << R"({"pair_id":"p)" << i << R"(","prob":0.)" << i << "}\n";
  }
  const auto probs = ingest_external_scores(pairs, ss);
  EXPECT_EQ(probs.size(), 10u);

  std::stringstream high(R"({"pair_id":"p0","prob":1.3})");
  EXPECT_THROW(read_scores(high), ValidationError);
  std::stringstream dup("{\"pair_id\":\"p0\",\"prob\":0.1}\n{\"pair_id\":\"p0\",\"prob\":0.2}\n");
  EXPECT_THROW(read_scores(dup), ValidationError);
  std::stringstream partial(R"({"pair_id":"p0","prob":0.1})");
  EXPECT_THROW(ingest_external_scores(pairs, partial), ValidationError);
  std::stringstream extra;
  for (int i = 0; i < 10; ++i) extra << R"({"pair_id":"p)" << i << R"(","prob":0.5})" << "\n";
  extra << R"({"pair_id":"zz","prob":0.5})" << "\n";
  EXPECT_THROW(ingest_external_scores(pairs, extra), ValidationError);

  const ExternalScores ext(probs);
  EXPECT_DOUBLE_EQ(ext.score(chunk("a"), chunk("b"), "p3"), 0.3);
  EXPECT_THROW(ext.score(chunk("a"), chunk("b"), "nope"), Error);
}
