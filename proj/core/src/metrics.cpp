#include "topseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "topseg/error.hpp"

namespace topseg::metrics {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::size_t> segment_ids(const Segmentation& seg) {
  std::vector<std::size_t> ids(seg.paragraph_count());
  for (std::size_t i = 0; i < seg.labels.size(); ++i) ids[i + 1] = ids[i] + (seg.labels[i] == 0 ? 1 : 0);
  return ids;
}

std::string shortest(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::string_view to_string(WindowMode m) {
  switch (m) {
    case WindowMode::half_avg_segment: return "half_avg_segment";
    case WindowMode::half_document: return "half_document";
    case WindowMode::fixed: return "fixed";
  }
  return "half_avg_segment";
}

WindowMode parse_window_mode(std::string_view s) {
  if (s == "half_avg_segment") return WindowMode::half_avg_segment;
  if (s == "half_document") return WindowMode::half_document;
  if (s == "fixed") return WindowMode::fixed;
  throw ValidationError("unknown window mode '" + std::string(s) + "'");
}

double pk(const Segmentation& reference, const Segmentation& hypothesis, std::size_t k) {
  if (reference.labels.size() != hypothesis.labels.size())
    throw ValidationError("reference and hypothesis for '" + reference.doc_id + "' differ in length");
  const std::size_t n = reference.paragraph_count();
  if (k < 1 || k >= n)
    throw ValidationError("window k=" + std::to_string(k) + " invalid for " + std::to_string(n) + " paragraphs");
  const auto ref = segment_ids(reference);
  const auto hyp = segment_ids(hypothesis);
  std::size_t disagree = 0;
  for (std::size_t i = 0; i + k < n; ++i)
    if ((ref[i] == ref[i + k]) != (hyp[i] == hyp[i + k])) ++disagree;
  return static_cast<double>(disagree) / static_cast<double>(n - k);
}

std::size_t default_window(const Segmentation& reference, WindowMode mode, std::size_t fixed_k) {
  const std::size_t n = reference.paragraph_count();
  switch (mode) {
    case WindowMode::half_avg_segment: {
      const std::size_t segments = 1 + static_cast<std::size_t>(std::count(reference.labels.begin(), reference.labels.end(), 0));
      // round(n / (2 s)) with halves up, in integers
      const std::size_t k = (n + segments) / (2 * segments);
      return std::max<std::size_t>(2, k);
    }
    case WindowMode::half_document: return std::max<std::size_t>(2, n / 2);
    case WindowMode::fixed: return fixed_k;
  }
  return fixed_k;
}

std::size_t count_mistakes(const Segmentation& reference, const Segmentation& hypothesis) {
  if (reference.labels.size() != hypothesis.labels.size())
    throw ValidationError("reference and hypothesis for '" + reference.doc_id + "' differ in length");
  std::size_t d = 0;
  for (std::size_t i = 0; i < reference.labels.size(); ++i) d += (reference.labels[i] != 0) != (hypothesis.labels[i] != 0);
  return d;
}

std::vector<double> acc_k_curve(std::span<const std::size_t> mistakes, std::size_t k_max) {
  if (mistakes.empty()) throw ValidationError("acc_k over zero documents");
  std::vector<std::size_t> hist(k_max + 1, 0);
  for (auto m : mistakes)
    if (m <= k_max) ++hist[m];
  std::vector<double> acc(k_max + 1);
  std::size_t cumulative = 0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    cumulative += hist[k];
    acc[k] = static_cast<double>(cumulative) / static_cast<double>(mistakes.size());
  }
  return acc;
}

std::vector<double> acc_k_curve(std::span<const std::pair<Segmentation, Segmentation>> pairs, std::size_t k_max) {
  std::vector<std::size_t> mistakes;
  mistakes.reserve(pairs.size());
  for (const auto& [ref, hyp] : pairs) mistakes.push_back(count_mistakes(ref, hyp));
  return acc_k_curve(mistakes, k_max);
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

EvalReport evaluate(const corpus::Corpus& reference, std::span<const Segmentation> hypotheses,
                    const EvalOptions& options) {
  std::map<std::string, const Segmentation*> by_id;
  for (const auto& h : hypotheses) by_id[h.doc_id] = &h;
  EvalReport report;
  report.window_mode = options.window_mode;
  report.fixed_k = options.window_mode == WindowMode::fixed ? options.fixed_k : 0;
  if (!hypotheses.empty()) {
    report.scorer = hypotheses.front().scorer;
    report.seed = hypotheses.front().seed;
    report.ensemble = hypotheses.front().seed < 0;
  }
  std::vector<std::size_t> mistakes;
  double sum = 0.0;
  for (const auto& doc : reference.documents) {
    auto it = by_id.find(doc.id);
    if (it == by_id.end()) throw MissingArtifactError("no segmentation for document '" + doc.id + "'");
    const auto ref = inference::reference_segmentation(doc);
    const Segmentation& hyp = *it->second;
    if (hyp.labels.size() != ref.labels.size())
      throw ValidationError("segmentation of '" + doc.id + "' has " + std::to_string(hyp.labels.size()) +
                            " labels, expected " + std::to_string(ref.labels.size()));
    const std::size_t n = ref.paragraph_count();
    if (n < 2) {
      ++report.skipped_docs;
      continue;
    }
    const std::size_t k = std::min(default_window(ref, options.window_mode, options.fixed_k), n - 1);
    DocScore s{doc.id, n, k, pk(ref, hyp, k), count_mistakes(ref, hyp)};
    sum += s.p_k;
    mistakes.push_back(s.mistakes);
    report.per_doc.push_back(std::move(s));
  }
  if (report.per_doc.empty()) throw ValidationError("no document with two or more paragraphs to evaluate");
  report.mean_pk = sum / static_cast<double>(report.per_doc.size());
  report.acc_k = acc_k_curve(mistakes, options.k_max);
  return report;
}

RunSummary summarize_runs(std::span<const EvalReport> reports) {
  RunSummary s;
  std::vector<double> means;
  for (const auto& r : reports) means.push_back(r.mean_pk);
  s.runs = means.size();
  if (!means.empty()) s.mean_pk = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
  s.std_pk = sample_std(means);
  return s;
}

std::string report_to_json(const EvalReport& report) {
  ordered_json j;
  j["format"] = "topseg-eval";
  j["version"] = 1;
  j["scorer"] = report.scorer;
  j["seed"] = report.seed;
  j["ensemble"] = report.ensemble;
  j["runs"] = report.runs;
  j["window_mode"] = to_string(report.window_mode);
  j["fixed_k"] = report.window_mode == WindowMode::fixed ? ordered_json(report.fixed_k) : ordered_json(nullptr);
  ordered_json agg;
  agg["documents"] = report.per_doc.size();
  agg["skipped_documents"] = report.skipped_docs;
  agg["mean_pk"] = report.mean_pk;
  agg["acc_k"] = report.acc_k;
  j["aggregate"] = std::move(agg);
  auto docs = ordered_json::array();
  for (const auto& d : report.per_doc)
    docs.push_back(ordered_json{{"doc_id", d.doc_id}, {"paragraphs", d.paragraphs}, {"k", d.k},
                                {"p_k", d.p_k}, {"mistakes", d.mistakes}});
  j["per_doc"] = std::move(docs);
  return j.dump(1);
}

EvalReport report_from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    if (j.at("format") != "topseg-eval") throw ValidationError("not a topseg evaluation report");
    EvalReport r;
    r.scorer = j.at("scorer").get<std::string>();
    r.seed = j.at("seed").get<std::int64_t>();
    r.ensemble = j.at("ensemble").get<bool>();
    r.runs = j.value("runs", std::size_t{1});
    r.window_mode = parse_window_mode(j.at("window_mode").get<std::string>());
    if (!j.at("fixed_k").is_null()) r.fixed_k = j.at("fixed_k").get<std::size_t>();
    const auto& agg = j.at("aggregate");
    r.skipped_docs = agg.at("skipped_documents").get<std::size_t>();
    r.mean_pk = agg.at("mean_pk").get<double>();
    r.acc_k = agg.at("acc_k").get<std::vector<double>>();
    for (const auto& d : j.at("per_doc"))
      r.per_doc.push_back({d.at("doc_id").get<std::string>(), d.at("paragraphs").get<std::size_t>(),
                           d.at("k").get<std::size_t>(), d.at("p_k").get<double>(), d.at("mistakes").get<std::size_t>()});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad evaluation report: ") + e.what());
  }
}

void save_report(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << report_to_json(report) << '\n';
}

EvalReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open evaluation report " + path.string() + " (produced by evaluate)");
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

void write_acc_csv(std::ostream& out, std::span<const double> acc, const std::string& scorer) {
  out << "k,acc_k,scorer\n";
  for (std::size_t k = 0; k < acc.size(); ++k) out << k << ',' << shortest(acc[k]) << ',' << scorer << '\n';
}

std::vector<std::pair<std::string, std::vector<double>>> read_acc_csv(std::istream& in) {
  std::vector<std::pair<std::string, std::vector<double>>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "k,acc_k,scorer") continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) throw ParseError("expected k,acc_k,scorer", line_no);
    const std::size_t k = std::stoul(line.substr(0, c1));
    const double acc = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    const std::string scorer = line.substr(c2 + 1);
    if (out.empty() || out.back().first != scorer) out.push_back({scorer, {}});
    if (k != out.back().second.size()) throw ParseError("acc_k rows out of order", line_no);
    out.back().second.push_back(acc);
  }
  return out;
}

}  // namespace topseg::metrics
