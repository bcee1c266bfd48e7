#include "topseg/inference.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "topseg/error.hpp"
#include "topseg/parallel.hpp"
#include "topseg/random.hpp"

namespace topseg::inference {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<sampling::Chunk> paragraph_chunks(const corpus::Document& doc) {
  std::vector<sampling::Chunk> out;
  for (const auto& r : corpus::paragraph_refs(doc)) out.push_back(sampling::paragraph_chunk(doc, r.section, r.paragraph));
  return out;
}

}  // namespace

Segmentation reference_segmentation(const corpus::Document& doc) {
  Segmentation seg;
  seg.doc_id = doc.id;
  seg.scorer = "reference";
  const auto refs = corpus::paragraph_refs(doc);
  for (std::size_t i = 0; i + 1 < refs.size(); ++i) seg.labels.push_back(refs[i].section == refs[i + 1].section ? 1 : 0);
  return seg;
}

std::vector<sampling::PairExample> adjacent_pairs(const corpus::Document& doc) {
  const auto chunks = paragraph_chunks(doc);
  const auto ref = reference_segmentation(doc);
  std::vector<sampling::PairExample> out;
  for (std::size_t i = 0; i + 1 < chunks.size(); ++i)
    out.push_back({doc.id + "#" + std::to_string(i), chunks[i], chunks[i + 1], ref.labels[i], sampling::Strategy::CP});
  return out;
}

Segmentation segment_document(const corpus::Document& doc, const scorers::PairScorer& scorer,
                              const SegmenterConfig& cfg) {
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw ValidationError("threshold must lie in (0, 1)");
  Segmentation seg;
  seg.doc_id = doc.id;
  seg.scorer = scorer.name();
  seg.probs.emplace();
  for (const auto& pair : adjacent_pairs(doc)) {
    const double p = scorer.score(pair.a, pair.b, pair.pair_id);
    seg.probs->push_back(p);
    seg.labels.push_back(p >= cfg.threshold ? 1 : 0);
  }
  return seg;
}

std::vector<Segmentation> segment_corpus(const corpus::Corpus& corpus, const scorers::PairScorer& scorer,
                                         const SegmenterConfig& cfg, std::size_t threads) {
  std::vector<Segmentation> out(corpus.documents.size());
  parallel_for(
      corpus.documents.size(), [&](std::size_t i) { out[i] = segment_document(corpus.documents[i], scorer, cfg); },
      threads);
  return out;
}

Segmentation random_oracle_segment(const corpus::Document& doc, std::uint64_t seed) {
  Segmentation seg;
  seg.doc_id = doc.id;
  seg.scorer = "random_oracle";
  seg.seed = static_cast<std::int64_t>(seed);
  const std::size_t n = doc.paragraph_count();
  if (n < 2) return seg;
  const double p_boundary = static_cast<double>(doc.sections.size()) / static_cast<double>(n);
  Rng rng(derive_seed(seed, "oracle:" + doc.id));
  for (std::size_t i = 0; i + 1 < n; ++i) seg.labels.push_back(rng.bernoulli(p_boundary) ? 0 : 1);
  return seg;
}

Segmentation ensemble_majority(std::span<const Segmentation> runs) {
  if (runs.empty()) throw ValidationError("ensemble needs at least one run");
  const auto& first = runs.front();
  std::set<std::string> names;
  for (const auto& r : runs) {
    if (r.doc_id != first.doc_id)
      throw ValidationError("ensemble runs disagree on document: '" + first.doc_id + "' vs '" + r.doc_id + "'");
    if (r.labels.size() != first.labels.size())
      throw ValidationError("ensemble runs for '" + first.doc_id + "' have different lengths");
    names.insert(r.scorer);
  }
  Segmentation out;
  out.doc_id = first.doc_id;
  out.seed = -1;
  out.scorer = names.size() == 1 ? *names.begin() + "+ens" : "ens";
  if (names.size() > 1)
    for (const auto& n : names) out.scorer += ":" + n;
  out.labels.resize(first.labels.size());
  for (std::size_t i = 0; i < first.labels.size(); ++i) {
    std::size_t ones = 0;
    for (const auto& r : runs) ones += r.labels[i] != 0;
    out.labels[i] = 2 * ones >= runs.size() ? 1 : 0;
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> to_sections(const Segmentation& seg) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < seg.labels.size(); ++i)
    if (seg.labels[i] == 0) {
      out.emplace_back(start, i);
      start = i + 1;
    }
  out.emplace_back(start, seg.labels.size());
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> to_sections(const Segmentation& seg, const corpus::Document& doc) {
  if (seg.paragraph_count() != doc.paragraph_count())
    throw ValidationError("segmentation of '" + seg.doc_id + "' has " + std::to_string(seg.labels.size()) +
                          " labels for " + std::to_string(doc.paragraph_count()) + " paragraphs");
  return to_sections(seg);
}

std::string segmentation_to_json_line(const Segmentation& seg) {
  ordered_json j;
  j["doc_id"] = seg.doc_id;
  j["labels"] = seg.labels;
  j["probs"] = seg.probs ? ordered_json(*seg.probs) : ordered_json(nullptr);
  j["scorer"] = seg.scorer;
  j["seed"] = seg.seed;
  return j.dump();
}

Segmentation segmentation_from_json_line(const std::string& line, std::size_t line_no) {
  try {
    const auto j = nlohmann::json::parse(line);
    Segmentation seg;
    seg.doc_id = j.at("doc_id").get<std::string>();
    seg.labels = j.at("labels").get<std::vector<int>>();
    for (int l : seg.labels)
      if (l != 0 && l != 1) throw ValidationError("line " + std::to_string(line_no) + ": labels must be 0 or 1");
    if (!j.at("probs").is_null()) {
      seg.probs = j.at("probs").get<std::vector<double>>();
      if (seg.probs->size() != seg.labels.size())
        throw ValidationError("line " + std::to_string(line_no) + ": probs and labels differ in length");
    }
    seg.scorer = j.value("scorer", "");
    seg.seed = j.value("seed", std::int64_t{0});
    return seg;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad segmentation record: ") + e.what(), line_no);
  }
}

void write_segmentations(std::ostream& out, std::span<const Segmentation> segs) {
  for (const auto& s : segs) out << segmentation_to_json_line(s) << '\n';
}

std::vector<Segmentation> read_segmentations(std::istream& in) {
  std::vector<Segmentation> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(segmentation_from_json_line(line, line_no));
    if (!ids.insert(out.back().doc_id).second)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate doc_id '" + out.back().doc_id + "'");
  }
  return out;
}

void save_segmentations(const std::filesystem::path& path, std::span<const Segmentation> segs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_segmentations(out, segs);
}

std::vector<Segmentation> load_segmentations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open segmentation file " + path.string() + " (produced by segment)");
  return read_segmentations(in);
}

}  // namespace topseg::inference
