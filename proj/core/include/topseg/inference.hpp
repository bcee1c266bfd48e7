#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topseg/corpus.hpp"
#include "topseg/sampling.hpp"
#include "topseg/scorers.hpp"

namespace topseg::inference {

/// labels[i] == 1 when paragraphs i and i+1 share a topic; 0 marks a
/// segment end after paragraph i. One label per adjacent paragraph pair.
struct Segmentation {
  std::string doc_id;
  std::vector<int> labels;
  std::optional<std::vector<double>> probs;
  std::string scorer;
  std::int64_t seed = 0;

  std::size_t paragraph_count() const { return labels.size() + 1; }
};

struct SegmenterConfig {
  double threshold = 0.5;
};

/// Ground truth from the section structure of a document.
Segmentation reference_segmentation(const corpus::Document& doc);

/// Adjacent paragraph pairs, ids "<doc_id>#<i>", labelled with the reference.
std::vector<sampling::PairExample> adjacent_pairs(const corpus::Document& doc);

/// Scores each adjacent pair on its own; label is 1 iff prob >= threshold.
Segmentation segment_document(const corpus::Document& doc, const scorers::PairScorer& scorer,
                              const SegmenterConfig& cfg = {});

std::vector<Segmentation> segment_corpus(const corpus::Corpus& corpus, const scorers::PairScorer& scorer,
                                         const SegmenterConfig& cfg = {}, std::size_t threads = 0);

/// Each slot independently becomes a boundary with probability
/// #sections / #paragraphs of the reference document.
Segmentation random_oracle_segment(const corpus::Document& doc, std::uint64_t seed);

/// Per-position majority vote; ties keep the paragraphs together (label 1).
Segmentation ensemble_majority(std::span<const Segmentation> runs);

/// Inclusive paragraph ranges of the segments, in order.
std::vector<std::pair<std::size_t, std::size_t>> to_sections(const Segmentation& seg);
std::vector<std::pair<std::size_t, std::size_t>> to_sections(const Segmentation& seg, const corpus::Document& doc);

std::string segmentation_to_json_line(const Segmentation& seg);
Segmentation segmentation_from_json_line(const std::string& line, std::size_t line_no = 0);
void write_segmentations(std::ostream& out, std::span<const Segmentation> segs);
std::vector<Segmentation> read_segmentations(std::istream& in);
void save_segmentations(const std::filesystem::path& path, std::span<const Segmentation> segs);
std::vector<Segmentation> load_segmentations(const std::filesystem::path& path);

}  // namespace topseg::inference
