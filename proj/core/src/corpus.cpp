#include "topseg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "topseg/error.hpp"
#include "topseg/random.hpp"

namespace topseg::corpus {

using ordered_json = nlohmann::ordered_json;

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; });
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::unsplit: return "unsplit";
    case SplitTag::train: return "train";
    case SplitTag::dev: return "dev";
    case SplitTag::test: return "test";
  }
  return "unsplit";
}

std::size_t Document::paragraph_count() const {
  std::size_t n = 0;
  for (const auto& s : sections) n += s.paragraphs.size();
  return n;
}

std::vector<ParagraphRef> paragraph_refs(const Document& doc) {
  std::vector<ParagraphRef> refs;
  refs.reserve(doc.paragraph_count());
  for (std::size_t s = 0; s < doc.sections.size(); ++s)
    for (std::size_t p = 0; p < doc.sections[s].paragraphs.size(); ++p) refs.push_back({s, p});
  return refs;
}

void validate_document(const Document& doc) {
  if (doc.id.empty()) throw ValidationError("document id is empty");
  if (doc.sections.empty()) throw ValidationError("document '" + doc.id + "' has no sections");
  for (std::size_t s = 0; s < doc.sections.size(); ++s) {
    const auto& sec = doc.sections[s];
    if (sec.paragraphs.empty())
      throw ValidationError("document '" + doc.id + "' section " + std::to_string(s) + " has no paragraphs");
    for (std::size_t p = 0; p < sec.paragraphs.size(); ++p)
      if (is_blank(sec.paragraphs[p]))
        throw ValidationError("document '" + doc.id + "' section " + std::to_string(s) + " paragraph " +
                              std::to_string(p) + " is blank");
  }
}

Document document_from_json_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  try {
    if (!j.is_object()) throw ValidationError("record is not a JSON object");
    Document doc;
    const auto& id = require(j, "id");
    if (!id.is_string()) throw ValidationError("field 'id' must be a string");
    doc.id = id.get<std::string>();
    doc.source_url = optional_string(j, "source_url");
    const auto& sections = require(j, "sections");
    if (!sections.is_array()) throw ValidationError("field 'sections' must be an array");
    for (const auto& js : sections) {
      Section sec;
      const auto& path = require(js, "heading_path");
      if (!path.is_array()) throw ValidationError("field 'heading_path' must be an array");
      for (const auto& h : path) sec.heading_path.push_back(h.get<std::string>());
      sec.topic_id = optional_string(js, "topic_id");
      const auto& paras = require(js, "paragraphs");
      if (!paras.is_array()) throw ValidationError("field 'paragraphs' must be an array");
      for (const auto& p : paras) sec.paragraphs.push_back(p.get<std::string>());
      doc.sections.push_back(std::move(sec));
    }
    validate_document(doc);
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("wrong field type: ") + e.what(), line_no);
  } catch (const ValidationError& e) {
    if (line_no == 0) throw;
    throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

std::string document_to_json_line(const Document& doc) {
  ordered_json j;
  j["id"] = doc.id;
  j["source_url"] = doc.source_url ? ordered_json(*doc.source_url) : ordered_json(nullptr);
  auto sections = ordered_json::array();
  for (const auto& sec : doc.sections) {
    ordered_json js;
    js["heading_path"] = sec.heading_path;
    js["topic_id"] = sec.topic_id ? ordered_json(*sec.topic_id) : ordered_json(nullptr);
    js["paragraphs"] = sec.paragraphs;
    sections.push_back(std::move(js));
  }
  j["sections"] = std::move(sections);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

Corpus read_corpus(std::istream& in, SplitTag tag) {
  Corpus corpus;
  corpus.split_tag = tag;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    Document doc = document_from_json_line(line, line_no);
    auto [it, inserted] = seen.emplace(doc.id, line_no);
    if (!inserted)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate document id '" + doc.id +
                            "' (first seen on line " + std::to_string(it->second) + ")");
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, SplitTag tag) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open corpus file " + path.string());
  return read_corpus(in, tag);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& doc : corpus.documents) out << document_to_json_line(doc) << '\n';
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_corpus(out, corpus);
}

SplitResult split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
  if (corpus.split_tag != SplitTag::unsplit) throw ValidationError("corpus is already a split");
  if (!(ratios.train > 0 && ratios.dev > 0 && ratios.test > 0))
    throw ValidationError("split ratios must be positive");
  if (std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9)
    throw ValidationError("split ratios must sum to 1");
  const std::size_t n = corpus.documents.size();
  if (n < 3) throw ValidationError("splitting needs at least 3 documents");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(std::span(order));

  // The epsilon keeps exact products such as 0.1 * 30 from flooring down.
  const auto floor_count = [n](double r) { return static_cast<std::size_t>(std::floor(r * n + 1e-9)); };
  const std::size_t n_dev = floor_count(ratios.dev);
  const std::size_t n_test = floor_count(ratios.test);
  const std::size_t n_train = n - n_dev - n_test;

  auto take = [&](std::size_t begin, std::size_t count, SplitTag tag) {
    std::vector<std::size_t> idx(order.begin() + begin, order.begin() + begin + count);
    std::sort(idx.begin(), idx.end());
    Corpus out;
    out.split_tag = tag;
    out.documents.reserve(count);
    for (auto i : idx) out.documents.push_back(corpus.documents[i]);
    return out;
  };
  return {take(0, n_train, SplitTag::train), take(n_train, n_dev, SplitTag::dev),
          take(n_train + n_dev, n_test, SplitTag::test)};
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.documents.empty()) throw ValidationError("corpus is empty");
  CorpusStats stats;
  stats.doc_count = corpus.documents.size();
  std::size_t sections = 0;
  std::size_t paragraphs = 0;
  for (const auto& doc : corpus.documents) {
    sections += doc.sections.size();
    paragraphs += doc.paragraph_count();
    for (const auto& sec : doc.sections) ++stats.topic_histogram[sec.topic_id.value_or(kUnlabeledTopic)];
  }
  stats.mean_sections_per_doc = static_cast<double>(sections) / static_cast<double>(stats.doc_count);
  stats.mean_paragraphs_per_doc = static_cast<double>(paragraphs) / static_cast<double>(stats.doc_count);
  return stats;
}

Corpus filter_min_paragraphs(const Corpus& corpus, std::size_t min_paragraphs) {
  Corpus out;
  out.split_tag = corpus.split_tag;
  for (const auto& doc : corpus.documents)
    if (doc.paragraph_count() >= min_paragraphs) out.documents.push_back(doc);
  return out;
}

}  // namespace topseg::corpus
