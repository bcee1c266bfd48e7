#include "topseg/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "topseg/error.hpp"
#include "topseg/random.hpp"

namespace topseg::sampling {

namespace {

using ordered_json = nlohmann::ordered_json;

// Fisher-Yates over [0, n) that materializes only the positions it touches.
class LazyPermutation {
public:
  LazyPermutation(std::size_t n, Rng& rng) : n_(n), rng_(rng) {}

  bool done() const { return next_ == n_; }

  std::size_t next() {
    const std::size_t j = next_ + static_cast<std::size_t>(rng_.below(n_ - next_));
    const std::size_t picked = at(j);
    swapped_[j] = at(next_);
    ++next_;
    return picked;
  }

private:
  std::size_t at(std::size_t i) const {
    auto it = swapped_.find(i);
    return it == swapped_.end() ? i : it->second;
  }

  std::size_t n_;
  std::size_t next_ = 0;
  Rng& rng_;
  std::unordered_map<std::size_t, std::size_t> swapped_;
};

struct Unit {
  std::size_t doc;
  std::size_t section;
  std::optional<std::size_t> paragraph;
  std::size_t topic;
};

class PairSet {
public:
  explicit PairSet(std::size_t n) : n_(n) {}
  bool contains(std::size_t a, std::size_t b) const { return set_.contains(key(a, b)); }
  void insert(std::size_t a, std::size_t b) { set_.insert(key(a, b)); }

private:
  std::uint64_t key(std::size_t a, std::size_t b) const {
    return static_cast<std::uint64_t>(std::min(a, b)) * n_ + std::max(a, b);
  }
  std::uint64_t n_;
  std::unordered_set<std::uint64_t> set_;
};

Chunk make_chunk(const corpus::Document& doc, const Unit& u) {
  return u.paragraph ? paragraph_chunk(doc, u.section, *u.paragraph) : section_chunk(doc, u.section);
}

std::string next_id(Strategy s, std::size_t n) { return std::string(to_string(s)) + "-" + std::to_string(n); }

SamplingResult sample_cross_document(const corpus::Corpus& corpus, const SamplingConfig& cfg, ChunkKind kind) {
  if (cfg.positives_per_anchor < 1 || cfg.negatives_per_anchor < 1)
    throw ValidationError("positives and negatives per anchor must be at least 1");

  std::vector<Unit> units;
  std::map<std::string, std::size_t> topic_index;
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
    const auto& doc = corpus.documents[d];
    for (std::size_t s = 0; s < doc.sections.size(); ++s) {
      const auto& sec = doc.sections[s];
      if (!sec.topic_id)
        throw MissingArtifactError("document '" + doc.id + "' has unlabeled sections; strategy " +
                                   std::string(to_string(cfg.strategy)) + " needs a corpus labeled by assign-topics");
      const std::size_t topic = topic_index.emplace(*sec.topic_id, topic_index.size()).first->second;
      if (kind == ChunkKind::section) {
        units.push_back({d, s, std::nullopt, topic});
      } else {
        for (std::size_t p = 0; p < sec.paragraphs.size(); ++p) units.push_back({d, s, p, topic});
      }
    }
  }
  if (topic_index.size() < 2) throw ValidationError("sampling needs at least two topics");

  std::vector<std::vector<std::size_t>> by_topic(topic_index.size());
  for (std::size_t i = 0; i < units.size(); ++i) by_topic[units[i].topic].push_back(i);

  SamplingResult result;
  PairSet used(units.size());
  const std::string stream = std::string(to_string(cfg.strategy));
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Unit& anchor = units[i];
    const auto& doc = corpus.documents[anchor.doc];
    Rng rng(derive_seed(cfg.seed, stream + ":" + doc.id, anchor.section,
                        anchor.paragraph ? *anchor.paragraph + 1 : 0));
    const Chunk anchor_chunk = make_chunk(doc, anchor);

    auto draw = [&](const std::vector<std::size_t>* pool, std::size_t quota, int label) {
      const std::size_t pool_size = pool ? pool->size() : units.size();
      LazyPermutation perm(pool_size, rng);
      std::size_t found = 0;
      while (found < quota && !perm.done()) {
        const std::size_t pick = pool ? (*pool)[perm.next()] : perm.next();
        const Unit& cand = units[pick];
        if (cand.doc == anchor.doc || used.contains(i, pick)) continue;
        if ((cand.topic == anchor.topic) != (label == 1)) continue;
        used.insert(i, pick);
        result.pairs.push_back({next_id(cfg.strategy, result.pairs.size()), anchor_chunk,
                                make_chunk(corpus.documents[cand.doc], cand), label, cfg.strategy});
        ++found;
      }
      return found;
    };
    const std::size_t pos = draw(&by_topic[anchor.topic], cfg.positives_per_anchor, 1);
    const std::size_t neg = draw(nullptr, cfg.negatives_per_anchor, 0);
    if (pos < cfg.positives_per_anchor || neg < cfg.negatives_per_anchor)
      result.flagged.push_back({doc.id, anchor.section, anchor.paragraph, pos, neg});
  }
  return result;
}

ordered_json chunk_json(const Chunk& c) {
  ordered_json j;
  j["doc_id"] = c.doc_id;
  j["section"] = c.section;
  j["paragraph"] = c.paragraph ? ordered_json(*c.paragraph) : ordered_json(nullptr);
  j["text"] = c.text;
  return j;
}

Chunk chunk_from_json(const nlohmann::json& j) {
  Chunk c;
  c.doc_id = j.at("doc_id").get<std::string>();
  c.section = j.at("section").get<std::size_t>();
  const auto& p = j.at("paragraph");
  if (!p.is_null()) c.paragraph = p.get<std::size_t>();
  c.kind = c.paragraph ? ChunkKind::paragraph : ChunkKind::section;
  c.text = j.at("text").get<std::string>();
  return c;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::S: return "S";
    case Strategy::RP: return "RP";
    case Strategy::CP: return "CP";
  }
  return "CP";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "S") return Strategy::S;
  if (s == "RP") return Strategy::RP;
  if (s == "CP") return Strategy::CP;
  throw ValidationError("unknown sampling strategy '" + std::string(s) + "' (expected S, RP or CP)");
}

Chunk section_chunk(const corpus::Document& doc, std::size_t section) {
  const auto& sec = doc.sections.at(section);
  Chunk c{doc.id, ChunkKind::section, section, std::nullopt, {}, sec.topic_id};
  for (std::size_t p = 0; p < sec.paragraphs.size(); ++p) {
    if (p) c.text += "\n\n";
    c.text += sec.paragraphs[p];
  }
  return c;
}

Chunk paragraph_chunk(const corpus::Document& doc, std::size_t section, std::size_t paragraph) {
  const auto& sec = doc.sections.at(section);
  return {doc.id, ChunkKind::paragraph, section, paragraph, sec.paragraphs.at(paragraph), sec.topic_id};
}

std::vector<Chunk> all_chunks(const corpus::Corpus& corpus, ChunkKind kind) {
  std::vector<Chunk> out;
  for (const auto& doc : corpus.documents)
    for (std::size_t s = 0; s < doc.sections.size(); ++s) {
      if (kind == ChunkKind::section) {
        out.push_back(section_chunk(doc, s));
      } else {
        for (std::size_t p = 0; p < doc.sections[s].paragraphs.size(); ++p) out.push_back(paragraph_chunk(doc, s, p));
      }
    }
  return out;
}

SamplingResult sample_section_pairs(const corpus::Corpus& corpus, const SamplingConfig& cfg) {
  SamplingConfig c = cfg;
  c.strategy = Strategy::S;
  return sample_cross_document(corpus, c, ChunkKind::section);
}

SamplingResult sample_random_paragraph_pairs(const corpus::Corpus& corpus, const SamplingConfig& cfg) {
  SamplingConfig c = cfg;
  c.strategy = Strategy::RP;
  return sample_cross_document(corpus, c, ChunkKind::paragraph);
}

SamplingResult sample_consecutive_pairs(const corpus::Corpus& corpus, const SamplingConfig& cfg) {
  SamplingResult result;
  for (const auto& doc : corpus.documents) {
    const auto refs = corpus::paragraph_refs(doc);
    std::vector<std::pair<std::size_t, std::size_t>> positives;
    std::vector<std::pair<std::size_t, std::size_t>> negatives;
    std::vector<std::pair<std::size_t, std::size_t>> cross;
    for (std::size_t i = 0; i + 1 < refs.size(); ++i) {
      if (refs[i].section == refs[i + 1].section)
        positives.emplace_back(i, i + 1);
      else
        negatives.emplace_back(i, i + 1);
    }
    for (std::size_t i = 0; i < refs.size(); ++i)
      for (std::size_t j = i + 2; j < refs.size(); ++j)
        if (refs[i].section != refs[j].section) cross.emplace_back(i, j);

    const std::size_t need = positives.size() > negatives.size() ? positives.size() - negatives.size() : 0;
    const std::size_t take = std::min(need, cross.size());
    Rng rng(derive_seed(cfg.seed, "CP:" + doc.id));
    for (std::size_t k = 0; k < take; ++k) std::swap(cross[k], cross[k + rng.below(cross.size() - k)]);
    negatives.insert(negatives.end(), cross.begin(), cross.begin() + static_cast<std::ptrdiff_t>(take));
    if (negatives.size() != positives.size() && !positives.empty())
      result.flagged.push_back({doc.id, 0, std::nullopt, positives.size(), negatives.size()});

    std::vector<std::pair<std::pair<std::size_t, std::size_t>, int>> labelled;
    for (auto p : positives) labelled.push_back({p, 1});
    for (auto p : negatives) labelled.push_back({p, 0});
    std::sort(labelled.begin(), labelled.end());
    for (const auto& [ij, label] : labelled) {
      const auto& a = refs[ij.first];
      const auto& b = refs[ij.second];
      result.pairs.push_back({next_id(Strategy::CP, result.pairs.size()), paragraph_chunk(doc, a.section, a.paragraph),
                              paragraph_chunk(doc, b.section, b.paragraph), label, Strategy::CP});
    }
  }
  if (result.pairs.empty()) throw ValidationError("no consecutive pairs: every document has a single paragraph");
  return result;
}

SamplingResult sample_pairs(const corpus::Corpus& corpus, const SamplingConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::S: return sample_section_pairs(corpus, cfg);
    case Strategy::RP: return sample_random_paragraph_pairs(corpus, cfg);
    case Strategy::CP: return sample_consecutive_pairs(corpus, cfg);
  }
  throw ValidationError("unknown strategy");
}

std::string pair_to_json_line(const PairExample& pair) {
  ordered_json j;
  j["pair_id"] = pair.pair_id;
  j["strategy"] = to_string(pair.strategy);
  j["label"] = pair.label;
  j["a"] = chunk_json(pair.a);
  j["b"] = chunk_json(pair.b);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

PairExample pair_from_json_line(const std::string& line, std::size_t line_no) {
  try {
    const auto j = nlohmann::json::parse(line);
    PairExample p;
    p.pair_id = j.at("pair_id").get<std::string>();
    p.strategy = parse_strategy(j.at("strategy").get<std::string>());
    p.label = j.at("label").get<int>();
    if (p.label != 0 && p.label != 1) throw ValidationError("label must be 0 or 1");
    p.a = chunk_from_json(j.at("a"));
    p.b = chunk_from_json(j.at("b"));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad pair record: ") + e.what(), line_no);
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

void write_pairs(std::ostream& out, const std::vector<PairExample>& pairs) {
  for (const auto& p : pairs) out << pair_to_json_line(p) << '\n';
}

std::vector<PairExample> read_pairs(std::istream& in) {
  std::vector<PairExample> pairs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    pairs.push_back(pair_from_json_line(line, line_no));
    if (!ids.insert(pairs.back().pair_id).second)
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate pair_id '" + pairs.back().pair_id + "'");
  }
  return pairs;
}

void save_pairs(const std::filesystem::path& path, const std::vector<PairExample>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_pairs(out, pairs);
}

std::vector<PairExample> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open pairs file " + path.string() + " (produced by sample)");
  return read_pairs(in);
}

void write_flagged(std::ostream& out, const std::vector<FlaggedAnchor>& flagged) {
  for (const auto& f : flagged) {
    ordered_json j;
    j["doc_id"] = f.doc_id;
    j["section"] = f.section;
    j["paragraph"] = f.paragraph ? ordered_json(*f.paragraph) : ordered_json(nullptr);
    j["positives"] = f.positives;
    j["negatives"] = f.negatives;
    out << j.dump() << '\n';
  }
}

}  // namespace topseg::sampling
