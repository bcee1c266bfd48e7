#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "topseg/corpus.hpp"
#include "topseg/sampling.hpp"
#include "topseg/text.hpp"

namespace topseg::scorers {

using text::tokenize;

/// Token index, optionally with smoothed idf weights
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1, N = number of fitted chunks.
struct Vocabulary {
  std::vector<std::string> tokens;  // column order
  std::unordered_map<std::string, std::uint32_t> index;
  std::optional<std::vector<double>> idf;
  corpus::SplitTag fitted_on = corpus::SplitTag::train;

  std::size_t size() const { return tokens.size(); }
  std::optional<std::uint32_t> find(std::string_view token) const;
};

/// Tokens with document frequency >= min_df, in lexicographic order.
Vocabulary fit_vocabulary(std::span<const sampling::Chunk> train_chunks, bool use_idf, std::size_t min_df = 1,
                          corpus::SplitTag fitted_on = corpus::SplitTag::train);

/// Word vectors in GloVe text format: token followed by d numbers per line.
class WordVectorTable {
public:
  WordVectorTable() = default;
  explicit WordVectorTable(std::size_t dimension) : dimension_(dimension) {}

  static WordVectorTable load(const std::filesystem::path& path);

  void add(std::string token, std::vector<double> vector);
  const std::vector<double>* find(std::string_view token) const;
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }

private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

/// A chunk embedding: sparse (sorted index/value pairs) for count models,
/// dense for averaged word vectors.
struct Embedding {
  std::size_t dimension = 0;
  std::vector<std::pair<std::uint32_t, double>> sparse;
  std::vector<double> dense;
  bool is_dense = false;
  std::size_t token_count = 0;  // tokens fed in, before vocabulary lookup
  bool oov_only = false;        // no token was in the vocabulary

  std::size_t nonzeros() const;
  double norm() const;
};

enum class ScorerKind { bow, tfidf, glove_avg, external };
enum class FeatureMode { dense_concat, sparse_sim };

std::string_view to_string(ScorerKind k);
std::string_view to_string(FeatureMode m);
ScorerKind parse_scorer_kind(std::string_view s);
FeatureMode parse_feature_mode(std::string_view s);

/// [u; v; |u - v|] (length 3d) or [cosine, support jaccard, token-count ratio].
struct PairFeatures {
  std::vector<double> values;
  FeatureMode mode = FeatureMode::sparse_sim;
};

PairFeatures pair_features(const Embedding& u, const Embedding& v, FeatureMode mode);

/// Drops the last token of the longer list (of `a` on ties) until the
/// combined length fits the budget.
std::pair<std::vector<std::string>, std::vector<std::string>> truncate_pair(std::vector<std::string> a,
                                                                            std::vector<std::string> b,
                                                                            std::size_t budget);

inline constexpr std::size_t kSingleEncoderBudget = 512;
inline constexpr std::size_t kPairedEncoderBudget = 1024;

struct TrainParams {
  double learning_rate = 1.0;
  std::size_t epochs = 500;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct TrainingMeta {
  std::size_t epochs = 0;
  double learning_rate = 0.0;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  TrainingMeta meta;

  double predict(std::span<const double> x) const;
};

struct LabeledFeatures {
  PairFeatures features;
  int label = 0;
};

/// Mean binary cross-entropy plus l2 * |w|^2 / 2 (bias unregularized).
/// Fills the gradient when the output pointers are non-null.
double logistic_loss(const LogisticModel& model, std::span<const LabeledFeatures> data, double l2,
                     std::vector<double>* grad_weights = nullptr, double* grad_bias = nullptr);

/// Full-batch gradient descent from zero weights.
LogisticModel train_logistic(std::span<const LabeledFeatures> data, const TrainParams& params);

double sigmoid(double z);

/// Anything that turns a chunk pair into a same-topic probability.
class PairScorer {
public:
  virtual ~PairScorer() = default;
  virtual double score(const sampling::Chunk& a, const sampling::Chunk& b, std::string_view pair_id) const = 0;
  virtual std::string name() const = 0;
};

/// A fitted featurizer plus logistic head.
class ScorerModel final : public PairScorer {
public:
  ScorerKind kind = ScorerKind::tfidf;
  FeatureMode mode = FeatureMode::sparse_sim;
  std::size_t token_budget = kSingleEncoderBudget;
  std::optional<Vocabulary> vocabulary;
  std::shared_ptr<const WordVectorTable> vectors;
  std::string vectors_path;
  LogisticModel head;
  std::string label;  // display name, defaults to the kind

  Embedding embed(std::span<const std::string> tokens) const;
  Embedding embed_chunk(const sampling::Chunk& chunk) const;
  PairFeatures features(const sampling::Chunk& a, const sampling::Chunk& b) const;

  double score(const sampling::Chunk& a, const sampling::Chunk& b, std::string_view pair_id = {}) const override;
  std::string name() const override;

  void save(const std::filesystem::path& path) const;
  static ScorerModel load(const std::filesystem::path& path);
  std::string to_json() const;
  static ScorerModel from_json(std::string_view json, const std::filesystem::path& base_dir = {});
};

struct ScorerSpec {
  ScorerKind kind = ScorerKind::tfidf;
  std::optional<FeatureMode> mode;       // default: sparse_sim for counts, dense_concat for vectors
  std::optional<std::size_t> token_budget;  // default follows the mode
  std::size_t min_df = 1;
  std::shared_ptr<const WordVectorTable> vectors;
  std::string vectors_path;
};

/// Fits the featurizer on training chunks, then the head on the pairs.
ScorerModel train_scorer(const ScorerSpec& spec, std::span<const sampling::Chunk> train_chunks,
                         std::span<const sampling::PairExample> pairs, const TrainParams& params);

/// Share of pairs whose thresholded score equals the label.
double pair_accuracy(const PairScorer& scorer, std::span<const sampling::PairExample> pairs, double threshold = 0.5);

/// Probabilities produced by an out-of-process scorer, keyed by pair id.
class ExternalScores final : public PairScorer {
public:
  ExternalScores(std::map<std::string, double> probs, std::string name = "external")
      : probs_(std::move(probs)), name_(std::move(name)) {}

  double score(const sampling::Chunk& a, const sampling::Chunk& b, std::string_view pair_id) const override;
  std::string name() const override { return name_; }
  const std::map<std::string, double>& probabilities() const { return probs_; }

private:
  std::map<std::string, double> probs_;
  std::string name_;
};

/// Reads a scores JSONL stream; rejects duplicates and values outside [0, 1].
std::map<std::string, double> read_scores(std::istream& in);
void write_scores(std::ostream& out, const std::vector<std::pair<std::string, double>>& scores);

/// Scores for exactly the pair ids of `pairs_file`, validated one-to-one.
std::map<std::string, double> ingest_external_scores(const std::filesystem::path& pairs_file,
                                                     const std::filesystem::path& scores_file);
std::map<std::string, double> ingest_external_scores(std::span<const sampling::PairExample> pairs,
                                                     std::istream& scores);

}  // namespace topseg::scorers
