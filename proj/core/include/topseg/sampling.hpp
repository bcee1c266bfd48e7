#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "topseg/corpus.hpp"

namespace topseg::sampling {

enum class ChunkKind { section, paragraph };
enum class Strategy { S, RP, CP };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

/// A section or paragraph used as one side of a pair. Section text joins
/// its paragraphs with blank lines.
struct Chunk {
  std::string doc_id;
  ChunkKind kind = ChunkKind::paragraph;
  std::size_t section = 0;
  std::optional<std::size_t> paragraph;
  std::string text;
  std::optional<std::string> topic_id;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

Chunk section_chunk(const corpus::Document& doc, std::size_t section);
Chunk paragraph_chunk(const corpus::Document& doc, std::size_t section, std::size_t paragraph);

/// Every chunk of the given kind in corpus order.
std::vector<Chunk> all_chunks(const corpus::Corpus& corpus, ChunkKind kind);

struct PairExample {
  std::string pair_id;
  Chunk a;
  Chunk b;
  int label = 0;  // 1 = same topic
  Strategy strategy = Strategy::CP;

  friend bool operator==(const PairExample&, const PairExample&) = default;
};

struct SamplingConfig {
  Strategy strategy = Strategy::CP;
  std::size_t positives_per_anchor = 3;
  std::size_t negatives_per_anchor = 3;
  std::uint64_t seed = 0;
};

/// An anchor that could not be given its full quota of pairs.
struct FlaggedAnchor {
  std::string doc_id;
  std::size_t section = 0;
  std::optional<std::size_t> paragraph;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct SamplingResult {
  std::vector<PairExample> pairs;
  std::vector<FlaggedAnchor> flagged;
};

/// Section pairs: per anchor section, positives are same-topic sections and
/// negatives different-topic sections, both from other documents.
SamplingResult sample_section_pairs(const corpus::Corpus& corpus, const SamplingConfig& cfg);

/// Paragraph pairs across documents; paragraphs inherit their section's topic.
SamplingResult sample_random_paragraph_pairs(const corpus::Corpus& corpus, const SamplingConfig& cfg);

/// Paragraph pairs within a document. Positives are adjacent paragraphs of
/// one section; negatives are all section-boundary pairs plus random
/// cross-section pairs until the document's negatives match its positives.
SamplingResult sample_consecutive_pairs(const corpus::Corpus& corpus, const SamplingConfig& cfg);

/// Dispatches on cfg.strategy.
SamplingResult sample_pairs(const corpus::Corpus& corpus, const SamplingConfig& cfg);

std::string pair_to_json_line(const PairExample& pair);
PairExample pair_from_json_line(const std::string& line, std::size_t line_no = 0);

void write_pairs(std::ostream& out, const std::vector<PairExample>& pairs);
std::vector<PairExample> read_pairs(std::istream& in);
void save_pairs(const std::filesystem::path& path, const std::vector<PairExample>& pairs);
std::vector<PairExample> load_pairs(const std::filesystem::path& path);

void write_flagged(std::ostream& out, const std::vector<FlaggedAnchor>& flagged);

}  // namespace topseg::sampling
