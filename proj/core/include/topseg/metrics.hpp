#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "topseg/corpus.hpp"
#include "topseg/inference.hpp"

namespace topseg::metrics {

using inference::Segmentation;

enum class WindowMode { half_avg_segment, half_document, fixed };

std::string_view to_string(WindowMode m);
WindowMode parse_window_mode(std::string_view s);

struct EvalWindow {
  std::size_t k = 2;
  WindowMode mode = WindowMode::half_avg_segment;
};

/// Beeferman's P_k over paragraph units: the share of positions i in
/// [0, n - k) where reference and hypothesis disagree on whether paragraphs
/// i and i + k share a segment. Requires 1 <= k < n.
double pk(const Segmentation& reference, const Segmentation& hypothesis, std::size_t k);

/// half_avg_segment: max(2, round(n / (2 * segments))), halves rounded up;
/// half_document: max(2, floor(n / 2)); fixed: `fixed_k`.
std::size_t default_window(const Segmentation& reference, WindowMode mode, std::size_t fixed_k = 2);

/// Hamming distance between label vectors.
std::size_t count_mistakes(const Segmentation& reference, const Segmentation& hypothesis);

/// acc_k = share of documents with at most k mistakes, k = 0..k_max.
std::vector<double> acc_k_curve(std::span<const std::size_t> mistakes, std::size_t k_max);
std::vector<double> acc_k_curve(std::span<const std::pair<Segmentation, Segmentation>> pairs, std::size_t k_max);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(std::span<const double> values);

struct DocScore {
  std::string doc_id;
  std::size_t paragraphs = 0;
  std::size_t k = 0;
  double p_k = 0.0;
  std::size_t mistakes = 0;
};

struct EvalReport {
  std::string scorer;
  std::int64_t seed = 0;
  bool ensemble = false;
  std::size_t runs = 1;  // member runs behind an ensemble
  WindowMode window_mode = WindowMode::half_avg_segment;
  std::size_t fixed_k = 0;
  std::vector<DocScore> per_doc;
  std::size_t skipped_docs = 0;  // single-paragraph documents have no P_k
  double mean_pk = 0.0;
  std::vector<double> acc_k;
};

struct EvalOptions {
  WindowMode window_mode = WindowMode::half_avg_segment;
  std::size_t fixed_k = 2;
  std::size_t k_max = 10;
};

/// Scores hypotheses against the reference corpus. Windows wider than the
/// document are narrowed to n - 1.
EvalReport evaluate(const corpus::Corpus& reference, std::span<const Segmentation> hypotheses,
                    const EvalOptions& options = {});

struct RunSummary {
  std::size_t runs = 0;
  double mean_pk = 0.0;
  double std_pk = 0.0;
};

/// Mean and sample std of per-run mean P_k.
RunSummary summarize_runs(std::span<const EvalReport> reports);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view json);
void save_report(const std::filesystem::path& path, const EvalReport& report);
EvalReport load_report(const std::filesystem::path& path);

/// CSV with header "k,acc_k,scorer".
void write_acc_csv(std::ostream& out, std::span<const double> acc, const std::string& scorer);
std::vector<std::pair<std::string, std::vector<double>>> read_acc_csv(std::istream& in);

}  // namespace topseg::metrics
