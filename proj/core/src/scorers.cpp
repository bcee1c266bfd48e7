#include "topseg/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "topseg/error.hpp"

namespace topseg::scorers {

namespace {

using ordered_json = nlohmann::ordered_json;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sparse_dot(const Embedding& u, const Embedding& v) {
  double s = 0.0;
  auto i = u.sparse.begin();
  auto j = v.sparse.begin();
  while (i != u.sparse.end() && j != v.sparse.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      s += i->second * j->second;
      ++i, ++j;
    }
  }
  return s;
}

double cosine(const Embedding& u, const Embedding& v) {
  double uv, uu, vv;
  if (u.is_dense) {
    uv = dot(u.dense, v.dense);
    uu = dot(u.dense, u.dense);
    vv = dot(v.dense, v.dense);
  } else {
    uv = sparse_dot(u, v);
    uu = sparse_dot(u, u);
    vv = sparse_dot(v, v);
  }
  if (uu == 0.0 || vv == 0.0) return 0.0;
  // sqrt(fl(x * x)) == |x|, so identical vectors give exactly 1.
  return std::clamp(uv / std::sqrt(uu * vv), -1.0, 1.0);
}

std::vector<std::uint32_t> support(const Embedding& e) {
  std::vector<std::uint32_t> s;
  if (e.is_dense) {
    for (std::size_t i = 0; i < e.dense.size(); ++i)
      if (e.dense[i] != 0.0) s.push_back(static_cast<std::uint32_t>(i));
  } else {
    for (const auto& [i, v] : e.sparse)
      if (v != 0.0) s.push_back(i);
  }
  return s;
}

double jaccard(const Embedding& u, const Embedding& v) {
  const auto a = support(u);
  const auto b = support(v);
  std::vector<std::uint32_t> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  const std::size_t uni = a.size() + b.size() - both.size();
  return uni == 0 ? 0.0 : static_cast<double>(both.size()) / static_cast<double>(uni);
}

ordered_json vector_json(const std::vector<double>& v) { return ordered_json(v); }

}  // namespace

std::optional<std::uint32_t> Vocabulary::find(std::string_view token) const {
  auto it = index.find(std::string(token));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Vocabulary fit_vocabulary(std::span<const sampling::Chunk> train_chunks, bool use_idf, std::size_t min_df,
                          corpus::SplitTag fitted_on) {
  if (train_chunks.empty()) throw ValidationError("cannot fit a vocabulary on zero chunks");
  std::map<std::string, std::size_t> df;
  for (const auto& c : train_chunks) {
    auto toks = tokenize(c.text);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (auto& t : toks) ++df[std::move(t)];
  }
  Vocabulary vocab;
  vocab.fitted_on = fitted_on;
  const double n = static_cast<double>(train_chunks.size());
  std::vector<double> idf;
  for (const auto& [tok, count] : df) {
    if (count < min_df) continue;
    vocab.index.emplace(tok, static_cast<std::uint32_t>(vocab.tokens.size()));
    vocab.tokens.push_back(tok);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  if (use_idf) vocab.idf = std::move(idf);
  return vocab;
}

WordVectorTable WordVectorTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open word-vector file " + path.string());
  WordVectorTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (row >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError("word vector component '" + field + "' is not a number", line_no);
      }
    }
    // word2vec-style "count dimension" header
    if (line_no == 1 && values.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos) continue;
    if (values.empty()) throw ParseError("token '" + token + "' has no vector", line_no);
    if (table.dimension_ == 0) table.dimension_ = values.size();
    if (values.size() != table.dimension_)
      throw ParseError("expected " + std::to_string(table.dimension_) + " components, got " +
                           std::to_string(values.size()),
                       line_no);
    table.vectors_.emplace(std::move(token), std::move(values));
  }
  if (table.vectors_.empty()) throw ValidationError("word-vector file " + path.string() + " is empty");
  return table;
}

void WordVectorTable::add(std::string token, std::vector<double> vector) {
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_) throw ValidationError("word vector dimension mismatch for '" + token + "'");
  vectors_[std::move(token)] = std::move(vector);
}

const std::vector<double>* WordVectorTable::find(std::string_view token) const {
  auto it = vectors_.find(std::string(token));
  return it == vectors_.end() ? nullptr : &it->second;
}

std::size_t Embedding::nonzeros() const { return support(*this).size(); }

double Embedding::norm() const {
  double s = 0.0;
  if (is_dense)
    for (double x : dense) s += x * x;
  else
    for (const auto& [i, x] : sparse) s += x * x;
  return std::sqrt(s);
}

std::string_view to_string(ScorerKind k) {
  switch (k) {
    case ScorerKind::bow: return "bow";
    case ScorerKind::tfidf: return "tfidf";
    case ScorerKind::glove_avg: return "glove_avg";
    case ScorerKind::external: return "external";
  }
  return "tfidf";
}

std::string_view to_string(FeatureMode m) { return m == FeatureMode::dense_concat ? "dense_concat" : "sparse_sim"; }

ScorerKind parse_scorer_kind(std::string_view s) {
  if (s == "bow") return ScorerKind::bow;
  if (s == "tfidf" || s == "tf-idf") return ScorerKind::tfidf;
  if (s == "glove_avg" || s == "glove") return ScorerKind::glove_avg;
  if (s == "external") return ScorerKind::external;
  throw ValidationError("unknown scorer kind '" + std::string(s) + "' (expected bow, tfidf, glove_avg)");
}

FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "dense_concat") return FeatureMode::dense_concat;
  if (s == "sparse_sim") return FeatureMode::sparse_sim;
  throw ValidationError("unknown feature mode '" + std::string(s) + "'");
}

PairFeatures pair_features(const Embedding& u, const Embedding& v, FeatureMode mode) {
  if (u.dimension != v.dimension || u.is_dense != v.is_dense)
    throw ValidationError("embedding dimensions differ: " + std::to_string(u.dimension) + " vs " +
                          std::to_string(v.dimension));
  PairFeatures f;
  f.mode = mode;
  if (mode == FeatureMode::dense_concat) {
    if (!u.is_dense) throw ValidationError("dense_concat needs dense embeddings");
    f.values.reserve(3 * u.dimension);
    f.values.insert(f.values.end(), u.dense.begin(), u.dense.end());
    f.values.insert(f.values.end(), v.dense.begin(), v.dense.end());
    for (std::size_t i = 0; i < u.dimension; ++i) f.values.push_back(std::abs(u.dense[i] - v.dense[i]));
    return f;
  }
  const std::size_t lo = std::min(u.token_count, v.token_count);
  const std::size_t hi = std::max(u.token_count, v.token_count);
  f.values = {cosine(u, v), jaccard(u, v), hi == 0 ? 0.0 : static_cast<double>(lo) / static_cast<double>(hi)};
  return f;
}

std::pair<std::vector<std::string>, std::vector<std::string>> truncate_pair(std::vector<std::string> a,
                                                                            std::vector<std::string> b,
                                                                            std::size_t budget) {
  if (budget < 2) throw ValidationError("token budget must be at least 2");
  if (a.size() + b.size() <= budget) return {std::move(a), std::move(b)};
  // Closed form of dropping one token at a time from the longer side.
  const std::size_t excess = a.size() + b.size() - budget;
  std::size_t la = a.size();
  std::size_t lb = b.size();
  const std::size_t gap = la > lb ? la - lb : lb - la;
  const std::size_t first = std::min(excess, gap);
  (la > lb ? la : lb) -= first;
  const std::size_t rest = excess - first;
  la -= (rest + 1) / 2;
  lb -= rest / 2;
  a.resize(la);
  b.resize(lb);
  return {std::move(a), std::move(b)};
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogisticModel::predict(std::span<const double> x) const {
  if (x.size() != weights.size())
    throw ValidationError("feature length " + std::to_string(x.size()) + " does not match model (" +
                          std::to_string(weights.size()) + ")");
  return sigmoid(dot(weights, x) + bias);
}

double logistic_loss(const LogisticModel& model, std::span<const LabeledFeatures> data, double l2,
                     std::vector<double>* grad_weights, double* grad_bias) {
  const std::size_t d = model.weights.size();
  if (grad_weights) grad_weights->assign(d, 0.0);
  if (grad_bias) *grad_bias = 0.0;
  double loss = 0.0;
  for (const auto& ex : data) {
    const auto& x = ex.features.values;
    if (x.size() != d) throw ValidationError("feature length mismatch in training data");
    const double z = dot(model.weights, x) + model.bias;
    // log(1 + e^z) - y z, evaluated without overflow
    loss += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - ex.label * z;
    const double r = sigmoid(z) - ex.label;
    if (grad_weights)
      for (std::size_t k = 0; k < d; ++k) (*grad_weights)[k] += r * x[k];
    if (grad_bias) *grad_bias += r;
  }
  const double n = static_cast<double>(data.size());
  loss /= n;
  double wsq = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    wsq += model.weights[k] * model.weights[k];
    if (grad_weights) (*grad_weights)[k] = (*grad_weights)[k] / n + l2 * model.weights[k];
  }
  if (grad_bias) *grad_bias /= n;
  return loss + 0.5 * l2 * wsq;
}

LogisticModel train_logistic(std::span<const LabeledFeatures> data, const TrainParams& params) {
  if (data.size() < 2) throw ValidationError("training needs at least two examples");
  const bool has_pos = std::any_of(data.begin(), data.end(), [](const auto& e) { return e.label == 1; });
  const bool has_neg = std::any_of(data.begin(), data.end(), [](const auto& e) { return e.label == 0; });
  if (!has_pos || !has_neg) throw ValidationError("training data has a single class");

  LogisticModel model;
  model.weights.assign(data.front().features.values.size(), 0.0);
  std::vector<double> gw;
  double gb = 0.0;
  model.meta.initial_loss = logistic_loss(model, data, params.l2);
  for (std::size_t e = 0; e < params.epochs; ++e) {
    logistic_loss(model, data, params.l2, &gw, &gb);
    for (std::size_t k = 0; k < gw.size(); ++k) model.weights[k] -= params.learning_rate * gw[k];
    model.bias -= params.learning_rate * gb;
  }
  model.meta.epochs = params.epochs;
  model.meta.learning_rate = params.learning_rate;
  model.meta.l2 = params.l2;
  model.meta.seed = params.seed;
  model.meta.final_loss = logistic_loss(model, data, params.l2);
  return model;
}

Embedding ScorerModel::embed(std::span<const std::string> tokens) const {
  Embedding e;
  e.token_count = tokens.size();
  if (kind == ScorerKind::glove_avg) {
    if (!vectors) throw ValidationError("glove_avg scorer has no word vectors loaded");
    e.is_dense = true;
    e.dimension = vectors->dimension();
    e.dense.assign(e.dimension, 0.0);
    std::size_t hits = 0;
    for (const auto& t : tokens)
      if (const auto* v = vectors->find(t)) {
        for (std::size_t i = 0; i < e.dimension; ++i) e.dense[i] += (*v)[i];
        ++hits;
      }
    if (hits)
      for (auto& x : e.dense) x /= static_cast<double>(hits);
    e.oov_only = hits == 0;
    return e;
  }
  if (!vocabulary) throw ValidationError("scorer has no fitted vocabulary");
  e.dimension = vocabulary->size();
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens)
    if (auto i = vocabulary->find(t)) counts[*i] += 1.0;
  e.oov_only = counts.empty();
  e.sparse.assign(counts.begin(), counts.end());
  if (kind == ScorerKind::tfidf) {
    if (!vocabulary->idf) throw ValidationError("tfidf scorer vocabulary has no idf weights");
    double sq = 0.0;
    for (auto& [i, x] : e.sparse) {
      x *= (*vocabulary->idf)[i];
      sq += x * x;
    }
    if (sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (auto& [i, x] : e.sparse) x /= norm;
    }
  }
  return e;
}

Embedding ScorerModel::embed_chunk(const sampling::Chunk& chunk) const {
  const auto tokens = tokenize(chunk.text);
  return embed(tokens);
}

PairFeatures ScorerModel::features(const sampling::Chunk& a, const sampling::Chunk& b) const {
  auto [ta, tb] = truncate_pair(tokenize(a.text), tokenize(b.text), token_budget);
  return pair_features(embed(ta), embed(tb), mode);
}

double ScorerModel::score(const sampling::Chunk& a, const sampling::Chunk& b, std::string_view) const {
  return head.predict(features(a, b).values);
}

std::string ScorerModel::name() const { return label.empty() ? std::string(to_string(kind)) : label; }

std::string ScorerModel::to_json() const {
  ordered_json j;
  j["format"] = "topseg-scorer";
  j["version"] = 1;
  j["kind"] = to_string(kind);
  j["mode"] = to_string(mode);
  j["token_budget"] = token_budget;
  j["label"] = label;
  if (vocabulary) {
    ordered_json v;
    v["fitted_on"] = corpus::to_string(vocabulary->fitted_on);
    v["tokens"] = vocabulary->tokens;
    v["idf"] = vocabulary->idf ? vector_json(*vocabulary->idf) : ordered_json(nullptr);
    j["vocabulary"] = std::move(v);
  } else {
    j["vocabulary"] = nullptr;
  }
  j["vectors_path"] = vectors_path.empty() ? ordered_json(nullptr) : ordered_json(vectors_path);
  ordered_json h;
  h["weights"] = vector_json(head.weights);
  h["bias"] = head.bias;
  h["meta"] = {{"epochs", head.meta.epochs},        {"learning_rate", head.meta.learning_rate},
               {"l2", head.meta.l2},                {"seed", head.meta.seed},
               {"initial_loss", head.meta.initial_loss}, {"final_loss", head.meta.final_loss}};
  j["head"] = std::move(h);
  return j.dump(1);
}

ScorerModel ScorerModel::from_json(std::string_view json, const std::filesystem::path& base_dir) {
  try {
    const auto j = nlohmann::json::parse(json);
    if (j.at("format") != "topseg-scorer") throw ValidationError("not a topseg scorer model");
    if (j.at("version").get<int>() != 1) throw ValidationError("unsupported model version");
    ScorerModel m;
    m.kind = parse_scorer_kind(j.at("kind").get<std::string>());
    m.mode = parse_feature_mode(j.at("mode").get<std::string>());
    m.token_budget = j.at("token_budget").get<std::size_t>();
    m.label = j.value("label", "");
    if (!j.at("vocabulary").is_null()) {
      const auto& v = j.at("vocabulary");
      Vocabulary vocab;
      vocab.tokens = v.at("tokens").get<std::vector<std::string>>();
      for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
        vocab.index.emplace(vocab.tokens[i], static_cast<std::uint32_t>(i));
      if (!v.at("idf").is_null()) vocab.idf = v.at("idf").get<std::vector<double>>();
      const auto tag = v.value("fitted_on", "train");
      vocab.fitted_on = tag == "dev" ? corpus::SplitTag::dev
                        : tag == "test" ? corpus::SplitTag::test
                        : tag == "unsplit" ? corpus::SplitTag::unsplit
                                           : corpus::SplitTag::train;
      m.vocabulary = std::move(vocab);
    }
    if (!j.at("vectors_path").is_null()) {
      m.vectors_path = j.at("vectors_path").get<std::string>();
      std::filesystem::path p(m.vectors_path);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      m.vectors = std::make_shared<WordVectorTable>(WordVectorTable::load(p));
    }
    const auto& h = j.at("head");
    m.head.weights = h.at("weights").get<std::vector<double>>();
    m.head.bias = h.at("bias").get<double>();
    const auto& meta = h.at("meta");
    m.head.meta = {meta.at("epochs").get<std::size_t>(),   meta.at("learning_rate").get<double>(),
                   meta.at("l2").get<double>(),            meta.at("seed").get<std::uint64_t>(),
                   meta.at("initial_loss").get<double>(), meta.at("final_loss").get<double>()};
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model file: ") + e.what());
  }
}

void ScorerModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json() << '\n';
}

ScorerModel ScorerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open model file " + path.string() + " (produced by train)");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.parent_path());
}

ScorerModel train_scorer(const ScorerSpec& spec, std::span<const sampling::Chunk> train_chunks,
                         std::span<const sampling::PairExample> pairs, const TrainParams& params) {
  ScorerModel m;
  m.kind = spec.kind;
  if (spec.kind == ScorerKind::external) throw ValidationError("external scores are ingested, not trained");
  m.mode = spec.mode.value_or(spec.kind == ScorerKind::glove_avg ? FeatureMode::dense_concat : FeatureMode::sparse_sim);
  m.token_budget =
      spec.token_budget.value_or(m.mode == FeatureMode::dense_concat ? kPairedEncoderBudget : kSingleEncoderBudget);
  if (spec.kind == ScorerKind::glove_avg) {
    if (!spec.vectors) throw ValidationError("glove_avg needs a word-vector table");
    m.vectors = spec.vectors;
    m.vectors_path = spec.vectors_path;
  } else {
    if (m.mode == FeatureMode::dense_concat) throw ValidationError("dense_concat is only available for glove_avg");
    m.vocabulary = fit_vocabulary(train_chunks, spec.kind == ScorerKind::tfidf, spec.min_df);
  }
  std::vector<LabeledFeatures> data;
  data.reserve(pairs.size());
  for (const auto& p : pairs) data.push_back({m.features(p.a, p.b), p.label});
  m.head = train_logistic(data, params);
  return m;
}

double pair_accuracy(const PairScorer& scorer, std::span<const sampling::PairExample> pairs, double threshold) {
  if (pairs.empty()) throw ValidationError("accuracy over zero pairs");
  std::size_t correct = 0;
  for (const auto& p : pairs) {
    const int predicted = scorer.score(p.a, p.b, p.pair_id) >= threshold ? 1 : 0;
    if (predicted == p.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

double ExternalScores::score(const sampling::Chunk&, const sampling::Chunk&, std::string_view pair_id) const {
  auto it = probs_.find(std::string(pair_id));
  if (it == probs_.end()) throw ValidationError("no external score for pair '" + std::string(pair_id) + "'");
  return it->second;
}

std::map<std::string, double> read_scores(std::istream& in) {
  std::map<std::string, double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id;
    double prob;
    try {
      const auto j = nlohmann::json::parse(line);
      id = j.at("pair_id").get<std::string>();
      if (!j.at("prob").is_number()) throw ValidationError("line " + std::to_string(line_no) + ": prob is not a number");
      prob = j.at("prob").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad score record: ") + e.what(), line_no);
    }
    if (!(prob >= 0.0 && prob <= 1.0))
      throw ValidationError("line " + std::to_string(line_no) + ": probability " + std::to_string(prob) +
                            " for pair '" + id + "' is outside [0, 1]");
    if (!out.emplace(id, prob).second)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate pair_id '" + id + "'");
  }
  return out;
}

void write_scores(std::ostream& out, const std::vector<std::pair<std::string, double>>& scores) {
  for (const auto& [id, prob] : scores) {
    ordered_json j;
    j["pair_id"] = id;
    j["prob"] = prob;
    out << j.dump() << '\n';
  }
}

std::map<std::string, double> ingest_external_scores(std::span<const sampling::PairExample> pairs,
                                                     std::istream& scores) {
  auto probs = read_scores(scores);
  std::unordered_set<std::string> expected;
  std::vector<std::string> missing;
  for (const auto& p : pairs) {
    expected.insert(p.pair_id);
    if (!probs.contains(p.pair_id)) missing.push_back(p.pair_id);
  }
  auto listing = [](const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size() && i < 20; ++i) s += (i ? ", " : "") + ids[i];
    if (ids.size() > 20) s += ", ... (" + std::to_string(ids.size() - 20) + " more)";
    return s;
  };
  if (!missing.empty())
    throw ValidationError(std::to_string(missing.size()) + " pair ids have no score: " + listing(missing));
  std::vector<std::string> unknown;
  for (const auto& [id, p] : probs)
    if (!expected.contains(id)) unknown.push_back(id);
  if (!unknown.empty())
    throw ValidationError(std::to_string(unknown.size()) + " scores name unknown pair ids: " + listing(unknown));
  return probs;
}

std::map<std::string, double> ingest_external_scores(const std::filesystem::path& pairs_file,
                                                     const std::filesystem::path& scores_file) {
  const auto pairs = sampling::load_pairs(pairs_file);
  std::ifstream in(scores_file);
  if (!in) throw MissingArtifactError("cannot open scores file " + scores_file.string());
  return ingest_external_scores(pairs, in);
}

}  // namespace topseg::scorers
