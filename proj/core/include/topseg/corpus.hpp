#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace topseg::corpus {

/// A top-level or nested section. Paragraph i of a section has index i.
struct Section {
  std::vector<std::string> heading_path;  // outermost first
  std::optional<std::string> topic_id;
  std::vector<std::string> paragraphs;

  friend bool operator==(const Section&, const Section&) = default;
};

struct Document {
  std::string id;
  std::optional<std::string> source_url;
  std::vector<Section> sections;

  std::size_t paragraph_count() const;

  friend bool operator==(const Document&, const Document&) = default;
};

enum class SplitTag { unsplit, train, dev, test };

std::string_view to_string(SplitTag tag);

struct Corpus {
  std::vector<Document> documents;
  SplitTag split_tag = SplitTag::unsplit;
};

/// Position of a paragraph inside a document.
struct ParagraphRef {
  std::size_t section = 0;
  std::size_t paragraph = 0;

  friend auto operator<=>(const ParagraphRef&, const ParagraphRef&) = default;
};

/// Document paragraphs in reading order (section lists concatenated).
std::vector<ParagraphRef> paragraph_refs(const Document& doc);

/// Throws ValidationError when a document breaks a data-model invariant.
void validate_document(const Document& doc);

Document document_from_json_line(const std::string& line, std::size_t line_no = 0);
std::string document_to_json_line(const Document& doc);

/// Reads corpus JSONL. Parse errors and duplicate ids cite the offending line.
Corpus read_corpus(std::istream& in, SplitTag tag = SplitTag::unsplit);
Corpus load_corpus(const std::filesystem::path& path, SplitTag tag = SplitTag::unsplit);

void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct SplitResult {
  Corpus train;
  Corpus dev;
  Corpus test;
};

/// Seeded document-level shuffle, then partition. Dev and test receive
/// floor(ratio * n) documents, train the remainder. Each output keeps the
/// input's relative document order.
SplitResult split_corpus(const Corpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

inline constexpr const char* kUnlabeledTopic = "<unlabeled>";

struct CorpusStats {
  std::size_t doc_count = 0;
  double mean_sections_per_doc = 0.0;
  double mean_paragraphs_per_doc = 0.0;
  std::map<std::string, std::size_t> topic_histogram;  // sections per topic
};

CorpusStats corpus_stats(const Corpus& corpus);

/// Keeps documents with at least `min_paragraphs` paragraphs. The section
/// and paragraph tasks apply different minimums, so their corpus sizes differ.
Corpus filter_min_paragraphs(const Corpus& corpus, std::size_t min_paragraphs);

}  // namespace topseg::corpus
