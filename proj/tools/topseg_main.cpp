#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "topseg/corpus.hpp"
#include "topseg/error.hpp"
#include "topseg/extract.hpp"
#include "topseg/inference.hpp"
#include "topseg/metrics.hpp"
#include "topseg/parallel.hpp"
#include "topseg/random.hpp"
#include "topseg/sampling.hpp"
#include "topseg/scorers.hpp"
#include "topseg/synth.hpp"
#include "topseg/topics.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace topseg;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kMetaVersion = 1;

enum Exit { ok = 0, usage = 1, validation = 2, missing = 3 };

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "";
  std::ostringstream ss;
  ss << in.rdbuf();
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(ss.str());
  return hex.str();
}

// <artifact>.meta.json next to every output
void write_meta(const fs::path& output, std::string_view stage, const std::vector<fs::path>& inputs,
                const ordered_json& params) {
  ordered_json j;
  j["format_version"] = kMetaVersion;
  j["tool_version"] = kToolVersion;
  j["stage"] = stage;
  j["params"] = params;
  auto in = ordered_json::array();
  for (const auto& p : inputs) in.push_back({{"path", p.generic_string()}, {"fnv1a64", file_hash(p)}});
  j["inputs"] = std::move(in);
  j["output"] = {{"path", output.generic_string()}, {"fnv1a64", file_hash(output)}};
  std::ofstream out(fs::path(output.string() + ".meta.json"), std::ios::binary);
  out << j.dump(1) << '\n';
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

bool has_unlabeled(const corpus::Corpus& c) {
  for (const auto& d : c.documents)
    for (const auto& s : d.sections)
      if (!s.topic_id) return true;
  return false;
}

sampling::ChunkKind chunk_kind(sampling::Strategy s) {
  return s == sampling::Strategy::S ? sampling::ChunkKind::section : sampling::ChunkKind::paragraph;
}

std::uint64_t as_seed(long long s) { return static_cast<std::uint64_t>(s); }

std::string base_scorer(const std::string& name) {
  constexpr std::string_view suffix = "+ens";
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
    return name.substr(0, name.size() - suffix.size());
  return name;
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

// ---- report rendering ------------------------------------------------------

struct ReportRow {
  std::string scorer;
  std::vector<metrics::EvalReport> runs;
  std::optional<metrics::EvalReport> ensemble;
};

std::vector<ReportRow> group_reports(const std::vector<metrics::EvalReport>& reports) {
  std::vector<ReportRow> rows;
  auto row_for = [&](const std::string& name) -> ReportRow& {
    for (auto& r : rows)
      if (r.scorer == name) return r;
    rows.push_back({name, {}, std::nullopt});
    return rows.back();
  };
  for (const auto& r : reports) {
    if (r.ensemble)
      row_for(base_scorer(r.scorer)).ensemble = r;
    else
      row_for(r.scorer).runs.push_back(r);
  }
  return rows;
}

void render_table(std::ostream& out, const std::vector<metrics::EvalReport>& reports) {
  const auto rows = group_reports(reports);
  std::string mode = reports.empty() ? "" : std::string(metrics::to_string(reports.front().window_mode));
  out << "window mode: " << mode << "\n";
  out << std::left << std::setw(24) << "scorer" << std::setw(6) << "runs" << std::setw(22) << "P_k mean ± std"
      << "ensemble P_k\n";
  for (const auto& row : rows) {
    const auto s = metrics::summarize_runs(row.runs);
    std::string cell = s.runs ? fmt(s.mean_pk) + " ± " + fmt(s.std_pk) : "-";
    std::string ens = row.ensemble && row.runs.size() != 1 ? fmt(row.ensemble->mean_pk) : "-";
    out << std::left << std::setw(24) << row.scorer << std::setw(6) << s.runs << std::setw(22) << cell << ens
        << "\n";
  }
}

void render_csv(std::ostream& out, const std::vector<metrics::EvalReport>& reports) {
  // one curve per ensemble; rows without an ensemble fall back to their first run
  out << "k,acc_k,scorer\n";
  for (const auto& row : group_reports(reports)) {
    const metrics::EvalReport* r = row.ensemble ? &*row.ensemble : row.runs.empty() ? nullptr : &row.runs.front();
    if (!r) continue;
    std::ostringstream body;
    metrics::write_acc_csv(body, r->acc_k, r->scorer);
    std::string text = body.str();
    out << text.substr(text.find('\n') + 1);
  }
}

// ---- pipeline ---------------------------------------------------------------

struct RunConfig {
  std::string corpus;
  std::string aliases;
  std::string vectors;
  std::string out_dir = "topseg-run";
  bool synth = false;
  synth::SynthConfig synth_cfg;
  std::string strategy = "CP";
  std::string scorer = "tfidf";
  std::vector<long long> seeds{0, 1, 2, 3, 4};
  long long split_seed = 0;
  std::string window_mode = "half_avg_segment";
  double threshold = 0.5;
  std::size_t epochs = 500;
};

int run_pipeline(const RunConfig& cfg) {
  if (cfg.seeds.empty()) throw ValidationError("at least one seed is required");
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  const auto strategy = sampling::parse_strategy(cfg.strategy);
  const auto window = metrics::parse_window_mode(cfg.window_mode);
  const auto kind = scorers::parse_scorer_kind(cfg.scorer);

  corpus::Corpus labeled;
  fs::path corpus_path;
  if (cfg.synth) {
    labeled = synth::generate(cfg.synth_cfg);
    corpus_path = out / "corpus.jsonl";
    corpus::save_corpus(corpus_path, labeled);
    write_meta(corpus_path, "synth", {}, {{"documents", cfg.synth_cfg.documents}, {"seed", cfg.synth_cfg.seed}});
  } else {
    if (cfg.corpus.empty()) throw ValidationError("run needs --corpus or --synth");
    labeled = corpus::load_corpus(cfg.corpus);
    corpus_path = cfg.corpus;
    if (has_unlabeled(labeled) && !cfg.aliases.empty()) {
      labeled = topics::assign_topics(labeled, topics::AliasTable::load(cfg.aliases));
      corpus_path = out / "labeled.jsonl";
      corpus::save_corpus(corpus_path, labeled);
      write_meta(corpus_path, "assign-topics", {cfg.corpus, cfg.aliases}, ordered_json::object());
    }
  }

  const auto parts = corpus::split_corpus(labeled, {}, as_seed(cfg.split_seed));
  for (auto [name, part] : {std::pair{"train", &parts.train}, {"dev", &parts.dev}, {"test", &parts.test}}) {
    const auto p = out / (std::string(name) + ".jsonl");
    corpus::save_corpus(p, *part);
    write_meta(p, "split", {corpus_path}, {{"seed", cfg.split_seed}});
  }

  std::shared_ptr<const scorers::WordVectorTable> vectors;
  if (kind == scorers::ScorerKind::glove_avg) {
    if (cfg.vectors.empty()) throw MissingArtifactError("scorer glove_avg needs --vectors");
    vectors = std::make_shared<scorers::WordVectorTable>(scorers::WordVectorTable::load(cfg.vectors));
  }

  const auto dev_pairs = sampling::sample_pairs(parts.dev, {strategy, 3, 3, 0}).pairs;
  sampling::save_pairs(out / "pairs.dev.jsonl", dev_pairs);
  write_meta(out / "pairs.dev.jsonl", "sample", {out / "dev.jsonl"}, {{"strategy", cfg.strategy}, {"seed", 0}});
  const auto train_chunks = sampling::all_chunks(parts.train, chunk_kind(strategy));

  std::vector<metrics::EvalReport> reports;
  std::vector<inference::Segmentation> all_runs;
  metrics::EvalOptions eval_opts;
  eval_opts.window_mode = window;
  for (long long seed : cfg.seeds) {
    const fs::path dir = out / ("seed-" + std::to_string(seed));
    fs::create_directories(dir);
    auto sampled = sampling::sample_pairs(parts.train, {strategy, 3, 3, as_seed(seed)});
    sampling::save_pairs(dir / "pairs.train.jsonl", sampled.pairs);
    write_meta(dir / "pairs.train.jsonl", "sample", {out / "train.jsonl"},
               {{"strategy", cfg.strategy}, {"seed", seed}});

    scorers::ScorerSpec spec;
    spec.kind = kind;
    spec.vectors = vectors;
    spec.vectors_path = cfg.vectors;
    scorers::TrainParams params;
    params.epochs = cfg.epochs;
    params.seed = as_seed(seed);
    auto model = scorers::train_scorer(spec, train_chunks, sampled.pairs, params);
    model.save(dir / "model.json");
    write_meta(dir / "model.json", "train", {dir / "pairs.train.jsonl"}, {{"scorer", cfg.scorer}, {"seed", seed}});
    std::cerr << "seed " << seed << ": dev STP accuracy " << fmt(scorers::pair_accuracy(model, dev_pairs)) << "\n";

    auto segs = inference::segment_corpus(parts.test, model, {cfg.threshold});
    for (auto& s : segs) s.seed = seed;
    inference::save_segmentations(dir / "segments.jsonl", segs);
    write_meta(dir / "segments.jsonl", "segment", {out / "test.jsonl", dir / "model.json"},
               {{"threshold", cfg.threshold}});
    auto report = metrics::evaluate(parts.test, segs, eval_opts);
    metrics::save_report(dir / "report.json", report);
    write_meta(dir / "report.json", "evaluate", {out / "test.jsonl", dir / "segments.jsonl"}, {{"window_mode", cfg.window_mode}});
    reports.push_back(report);
    all_runs.insert(all_runs.end(), segs.begin(), segs.end());
  }

  {
    const fs::path dir = out / "oracle";
    fs::create_directories(dir);
    std::vector<inference::Segmentation> segs;
    for (const auto& d : parts.test.documents) segs.push_back(inference::random_oracle_segment(d, as_seed(cfg.seeds.front())));
    inference::save_segmentations(dir / "segments.jsonl", segs);
    write_meta(dir / "segments.jsonl", "oracle", {out / "test.jsonl"}, {{"seed", cfg.seeds.front()}});
    auto report = metrics::evaluate(parts.test, segs, eval_opts);
    metrics::save_report(dir / "report.json", report);
    write_meta(dir / "report.json", "evaluate", {out / "test.jsonl", dir / "segments.jsonl"}, {{"window_mode", cfg.window_mode}});
    reports.push_back(report);
  }

  if (cfg.seeds.size() >= 2) {
    const fs::path dir = out / "ensemble";
    fs::create_directories(dir);
    std::map<std::string, std::vector<inference::Segmentation>> by_doc;
    for (const auto& s : all_runs) by_doc[s.doc_id].push_back(s);
    std::vector<inference::Segmentation> ens;
    for (const auto& d : parts.test.documents) ens.push_back(inference::ensemble_majority(by_doc.at(d.id)));
    inference::save_segmentations(dir / "segments.jsonl", ens);
    write_meta(dir / "segments.jsonl", "ensemble", {}, {{"runs", cfg.seeds.size()}});
    auto report = metrics::evaluate(parts.test, ens, eval_opts);
    report.runs = cfg.seeds.size();
    metrics::save_report(dir / "report.json", report);
    write_meta(dir / "report.json", "evaluate", {out / "test.jsonl", dir / "segments.jsonl"}, {{"window_mode", cfg.window_mode}});
    std::ofstream csv(dir / "acc.csv");
    metrics::write_acc_csv(csv, report.acc_k, report.scorer);
    reports.push_back(report);
  }

  std::ofstream summary(out / "summary.txt");
  render_table(summary, reports);
  render_table(std::cout, reports);
  return ok;
}

// TOPSEG_SEED beats config values but not an explicit flag
bool flag_given(int argc, char** argv, std::initializer_list<std::string_view> names) {
  for (int i = 1; i < argc; ++i) {
    std::string_view a = argv[i];
    for (auto n : names)
      if (a == n || (a.size() > n.size() && a.substr(0, n.size()) == n && a[n.size()] == '=')) return true;
  }
  return false;
}

std::vector<long long> parse_seed_list(const std::string& s) {
  std::vector<long long> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("TOPSEG_SEED must be an integer or comma-separated integers, got '" + s + "'");
    }
  }
  if (out.empty()) throw ValidationError("TOPSEG_SEED is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic segmentation of legal documents via same-topic prediction"};
  app.set_config("--config", "", "key = value settings file; [subcommand] sections, flags win");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "HTML directory -> corpus JSONL");
  std::string ex_input, ex_out;
  extract::ExtractOptions ex_opts;
  extract_cmd->add_option("--input", ex_input, "directory of .html files")->required();
  extract_cmd->add_option("--out", ex_out)->required();
  extract_cmd->add_option("--min-occurrences", ex_opts.min_occurrences)->capture_default_str();
  extract_cmd->add_option("--min-english-ratio", ex_opts.min_english_ratio)->capture_default_str();

  // build-aliases
  auto* aliases_cmd = app.add_subcommand("build-aliases", "frequent normalized headings for curation");
  std::string al_corpus, al_out;
  std::size_t al_min = 250;
  aliases_cmd->add_option("--corpus", al_corpus)->required();
  aliases_cmd->add_option("--out", al_out)->required();
  aliases_cmd->add_option("--min-count", al_min)->capture_default_str();

  // assign-topics
  auto* assign_cmd = app.add_subcommand("assign-topics", "label sections through an alias table");
  std::string as_corpus, as_aliases, as_out;
  assign_cmd->add_option("--corpus", as_corpus)->required();
  assign_cmd->add_option("--aliases", as_aliases)->required();
  assign_cmd->add_option("--out", as_out)->required();

  // split
  auto* split_cmd = app.add_subcommand("split", "train/dev/test split at document level");
  std::string sp_corpus, sp_out;
  corpus::SplitRatios sp_ratios;
  long long sp_seed = 0;
  split_cmd->add_option("--corpus", sp_corpus)->required();
  split_cmd->add_option("--out-dir", sp_out)->required();
  split_cmd->add_option("--train", sp_ratios.train)->capture_default_str();
  split_cmd->add_option("--dev", sp_ratios.dev)->capture_default_str();
  split_cmd->add_option("--test", sp_ratios.test)->capture_default_str();
  split_cmd->add_option("--seed", sp_seed)->capture_default_str();

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "same-topic pairs");
  std::string sa_corpus, sa_out, sa_flagged, sa_strategy = "CP";
  long long sa_seed = 0;
  std::size_t sa_pos = 3, sa_neg = 3;
  sample_cmd->add_option("--corpus", sa_corpus)->required();
  sample_cmd->add_option("--out", sa_out)->required();
  sample_cmd->add_option("--strategy", sa_strategy)->check(CLI::IsMember({"S", "RP", "CP"}))->capture_default_str();
  sample_cmd->add_option("--seed", sa_seed)->capture_default_str();
  sample_cmd->add_option("--positives", sa_pos)->capture_default_str();
  sample_cmd->add_option("--negatives", sa_neg)->capture_default_str();
  sample_cmd->add_option("--flagged", sa_flagged, "JSONL of anchors that could not be balanced");

  // train
  auto* train_cmd = app.add_subcommand("train", "fit a pair scorer");
  std::string tr_corpus, tr_pairs, tr_out, tr_kind = "tfidf", tr_mode, tr_vectors, tr_dev;
  std::optional<std::size_t> tr_budget;
  std::size_t tr_min_df = 1;
  scorers::TrainParams tr_params;
  long long tr_seed = 0;
  train_cmd->add_option("--corpus", tr_corpus, "training split, fits the vocabulary")->required();
  train_cmd->add_option("--pairs", tr_pairs)->required();
  train_cmd->add_option("--out", tr_out)->required();
  train_cmd->add_option("--scorer", tr_kind)->check(CLI::IsMember({"bow", "tfidf", "glove_avg"}))->capture_default_str();
  train_cmd->add_option("--mode", tr_mode)->check(CLI::IsMember({"sparse_sim", "dense_concat"}));
  train_cmd->add_option("--budget", tr_budget, "token budget per pair");
  train_cmd->add_option("--vectors", tr_vectors, "GloVe-format word vectors");
  train_cmd->add_option("--min-df", tr_min_df)->capture_default_str();
  train_cmd->add_option("--epochs", tr_params.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tr_params.learning_rate)->capture_default_str();
  train_cmd->add_option("--l2", tr_params.l2)->capture_default_str();
  train_cmd->add_option("--seed", tr_seed)->capture_default_str();
  train_cmd->add_option("--dev-pairs", tr_dev, "report accuracy on these pairs");

  // score
  auto* score_cmd = app.add_subcommand("score", "probabilities for a pairs file");
  std::string sc_model, sc_pairs, sc_out;
  score_cmd->add_option("--model", sc_model)->required();
  score_cmd->add_option("--pairs", sc_pairs)->required();
  score_cmd->add_option("--out", sc_out)->required();

  // segment
  auto* segment_cmd = app.add_subcommand("segment", "sequential same-topic inference");
  std::string sg_corpus, sg_model, sg_scores, sg_out, sg_export;
  double sg_threshold = 0.5;
  long long sg_seed = 0;
  segment_cmd->add_option("--corpus", sg_corpus)->required();
  auto* sg_model_opt = segment_cmd->add_option("--model", sg_model);
  auto* sg_scores_opt = segment_cmd->add_option("--scores", sg_scores, "external scores JSONL for the exported pairs");
  auto* sg_export_opt = segment_cmd->add_option("--export-pairs", sg_export, "write adjacent pairs for an external scorer and stop");
  sg_model_opt->excludes(sg_scores_opt)->excludes(sg_export_opt);
  sg_scores_opt->excludes(sg_export_opt);
  segment_cmd->add_option("--out", sg_out);
  segment_cmd->add_option("--threshold", sg_threshold)->capture_default_str();
  segment_cmd->add_option("--seed", sg_seed, "run seed recorded in the output")->capture_default_str();

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "random baseline at the true boundary rate");
  std::string or_corpus, or_out;
  long long or_seed = 0;
  oracle_cmd->add_option("--corpus", or_corpus)->required();
  oracle_cmd->add_option("--out", or_out)->required();
  oracle_cmd->add_option("--seed", or_seed)->capture_default_str();

  // ensemble
  auto* ensemble_cmd = app.add_subcommand("ensemble", "majority vote over runs");
  std::vector<std::string> en_inputs;
  std::string en_out;
  ensemble_cmd->add_option("--inputs", en_inputs, "segmentation files, one per run")->required()->expected(1, -1);
  ensemble_cmd->add_option("--out", en_out)->required();

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "P_k and acc_k against the reference");
  std::string ev_corpus, ev_segs, ev_out, ev_csv, ev_mode = "half_avg_segment";
  metrics::EvalOptions ev_opts;
  std::size_t ev_runs = 0;
  evaluate_cmd->add_option("--corpus", ev_corpus)->required();
  evaluate_cmd->add_option("--segments", ev_segs)->required();
  evaluate_cmd->add_option("--out", ev_out)->required();
  evaluate_cmd->add_option("--window-mode", ev_mode)
      ->check(CLI::IsMember({"half_avg_segment", "half_document", "fixed"}))
      ->capture_default_str();
  evaluate_cmd->add_option("--k", ev_opts.fixed_k, "window for --window-mode fixed")->capture_default_str();
  evaluate_cmd->add_option("--k-max", ev_opts.k_max)->capture_default_str();
  evaluate_cmd->add_option("--acc-csv", ev_csv);
  evaluate_cmd->add_option("--runs", ev_runs, "member runs behind an ensemble");

  // report
  auto* report_cmd = app.add_subcommand("report", "mean ± std P_k table or acc_k CSV");
  std::vector<std::string> rp_inputs;
  std::string rp_format = "table", rp_out;
  report_cmd->add_option("--inputs", rp_inputs, "evaluation reports")->required()->expected(1, -1);
  report_cmd->add_option("--format", rp_format)->check(CLI::IsMember({"table", "csv"}))->capture_default_str();
  report_cmd->add_option("--out", rp_out);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "planted-topic corpus");
  std::string sy_out;
  synth::SynthConfig sy;
  auto add_synth_flags = [](CLI::App* cmd, synth::SynthConfig& c) {
    cmd->add_option("--documents", c.documents)->capture_default_str();
    cmd->add_option("--topics", c.topics)->capture_default_str();
    cmd->add_option("--vocabulary", c.vocabulary, "words per topic")->capture_default_str();
    cmd->add_option("--noise-vocabulary", c.noise_vocabulary)->capture_default_str();
    cmd->add_option("--noise-rate", c.noise_rate)->capture_default_str();
  };
  synth_cmd->add_option("--out", sy_out)->required();
  add_synth_flags(synth_cmd, sy);
  synth_cmd->add_option("--seed", sy.seed)->capture_default_str();

  // run
  auto* run_cmd = app.add_subcommand("run", "whole pipeline: split, sample, train, segment, evaluate, ensemble");
  RunConfig rc;
  run_cmd->add_option("--corpus", rc.corpus);
  run_cmd->add_flag("--synth", rc.synth, "generate a planted-topic corpus instead");
  add_synth_flags(run_cmd, rc.synth_cfg);
  run_cmd->add_option("--aliases", rc.aliases);
  run_cmd->add_option("--vectors", rc.vectors);
  run_cmd->add_option("--out-dir", rc.out_dir)->capture_default_str();
  run_cmd->add_option("--strategy", rc.strategy)->check(CLI::IsMember({"S", "RP", "CP"}))->capture_default_str();
  run_cmd->add_option("--scorer", rc.scorer)->check(CLI::IsMember({"bow", "tfidf", "glove_avg"}))->capture_default_str();
  run_cmd->add_option("--seeds", rc.seeds)->delimiter(',')->capture_default_str();
  run_cmd->add_option("--split-seed", rc.split_seed)->capture_default_str();
  run_cmd->add_option("--window-mode", rc.window_mode)
      ->check(CLI::IsMember({"half_avg_segment", "half_document", "fixed"}))
      ->capture_default_str();
  run_cmd->add_option("--threshold", rc.threshold)->capture_default_str();
  run_cmd->add_option("--epochs", rc.epochs)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  }

  try {
    if (const char* env = std::getenv("TOPSEG_SEED"); env && !flag_given(argc, argv, {"--seed", "--seeds"})) {
      const auto seeds = parse_seed_list(env);
      rc.seeds = seeds;
      sp_seed = sa_seed = tr_seed = sg_seed = or_seed = seeds.front();
      sy.seed = as_seed(seeds.front());
    }

    if (app.got_subcommand(extract_cmd)) {
      if (!fs::is_directory(ex_input)) throw MissingArtifactError("input directory " + ex_input + " not found");
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(ex_input)) {
        const auto ext = e.path().extension();
        if (e.is_regular_file() && (ext == ".html" || ext == ".htm")) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      std::vector<extract::ExtractOutcome> outcomes(files.size());
      parallel_for(files.size(), [&](std::size_t i) {
        std::ifstream in(files[i], std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        try {
          outcomes[i] = extract::extract_page(ss.str(), files[i].stem().string(), ex_opts);
        } catch (const ValidationError& e) {
          outcomes[i].rejection = e.what();
        }
      });
      corpus::Corpus c;
      for (std::size_t i = 0; i < files.size(); ++i) {
        if (outcomes[i].document)
          c.documents.push_back(std::move(*outcomes[i].document));
        else
          std::cerr << "skipped " << files[i].filename().string() << ": " << outcomes[i].rejection << "\n";
      }
      ensure_parent(ex_out);
      corpus::save_corpus(ex_out, c);
      write_meta(ex_out, "extract", files,
                 {{"min_occurrences", ex_opts.min_occurrences}, {"min_english_ratio", ex_opts.min_english_ratio}});
      std::cerr << c.documents.size() << " of " << files.size() << " pages extracted\n";
    } else if (app.got_subcommand(aliases_cmd)) {
      if (al_min < 1) throw ValidationError("--min-count must be at least 1");
      const auto counts = topics::build_alias_candidates(corpus::load_corpus(al_corpus), al_min);
      ordered_json j = ordered_json::array();
      for (const auto& hc : counts) j.push_back({{"heading", hc.heading}, {"count", hc.count}});
      ensure_parent(al_out);
      std::ofstream(al_out) << j.dump(1) << '\n';
      write_meta(al_out, "build-aliases", {al_corpus}, {{"min_count", al_min}});
    } else if (app.got_subcommand(assign_cmd)) {
      const auto labeled = topics::assign_topics(corpus::load_corpus(as_corpus), topics::AliasTable::load(as_aliases));
      ensure_parent(as_out);
      corpus::save_corpus(as_out, labeled);
      write_meta(as_out, "assign-topics", {as_corpus, as_aliases}, ordered_json::object());
      std::cerr << labeled.documents.size() << " documents keep at least one topic\n";
    } else if (app.got_subcommand(split_cmd)) {
      const auto parts = corpus::split_corpus(corpus::load_corpus(sp_corpus), sp_ratios, as_seed(sp_seed));
      fs::create_directories(sp_out);
      for (auto [name, part] : {std::pair{"train", &parts.train}, {"dev", &parts.dev}, {"test", &parts.test}}) {
        const auto p = fs::path(sp_out) / (std::string(name) + ".jsonl");
        corpus::save_corpus(p, *part);
        write_meta(p, "split", {sp_corpus}, {{"seed", sp_seed}});
      }
    } else if (app.got_subcommand(sample_cmd)) {
      const auto c = corpus::load_corpus(sa_corpus);
      const sampling::SamplingConfig cfg{sampling::parse_strategy(sa_strategy), sa_pos, sa_neg, as_seed(sa_seed)};
      const auto result = sampling::sample_pairs(c, cfg);
      ensure_parent(sa_out);
      sampling::save_pairs(sa_out, result.pairs);
      write_meta(sa_out, "sample", {sa_corpus}, {{"strategy", sa_strategy}, {"seed", sa_seed}});
      if (!sa_flagged.empty()) {
        std::ofstream f(sa_flagged);
        sampling::write_flagged(f, result.flagged);
      }
      std::cerr << result.pairs.size() << " pairs, " << result.flagged.size() << " unbalanced anchors\n";
    } else if (app.got_subcommand(train_cmd)) {
      const auto c = corpus::load_corpus(tr_corpus, corpus::SplitTag::train);
      const auto pairs = sampling::load_pairs(tr_pairs);
      if (pairs.empty()) throw ValidationError("no training pairs in " + tr_pairs);
      scorers::ScorerSpec spec;
      spec.kind = scorers::parse_scorer_kind(tr_kind);
      if (!tr_mode.empty()) spec.mode = scorers::parse_feature_mode(tr_mode);
      spec.token_budget = tr_budget;
      spec.min_df = tr_min_df;
      if (spec.kind == scorers::ScorerKind::glove_avg) {
        if (tr_vectors.empty()) throw MissingArtifactError("scorer glove_avg needs --vectors");
        spec.vectors = std::make_shared<scorers::WordVectorTable>(scorers::WordVectorTable::load(tr_vectors));
        spec.vectors_path = fs::absolute(tr_vectors).string();
      }
      tr_params.seed = as_seed(tr_seed);
      const auto kind = pairs.front().a.kind;
      const auto model = scorers::train_scorer(spec, sampling::all_chunks(c, kind), pairs, tr_params);
      ensure_parent(tr_out);
      model.save(tr_out);
      write_meta(tr_out, "train", {tr_corpus, tr_pairs}, {{"scorer", tr_kind}, {"seed", tr_seed}});
      std::cerr << "train loss " << fmt(model.head.meta.initial_loss) << " -> " << fmt(model.head.meta.final_loss)
                << ", train accuracy " << fmt(scorers::pair_accuracy(model, pairs)) << "\n";
      if (!tr_dev.empty())
        std::cout << "dev accuracy " << fmt(scorers::pair_accuracy(model, sampling::load_pairs(tr_dev))) << "\n";
    } else if (app.got_subcommand(score_cmd)) {
      const auto model = scorers::ScorerModel::load(sc_model);
      const auto pairs = sampling::load_pairs(sc_pairs);
      std::vector<std::pair<std::string, double>> scores(pairs.size());
      parallel_for(pairs.size(), [&](std::size_t i) {
        scores[i] = {pairs[i].pair_id, model.score(pairs[i].a, pairs[i].b, pairs[i].pair_id)};
      });
      ensure_parent(sc_out);
      std::ofstream out(sc_out, std::ios::binary);
      scorers::write_scores(out, scores);
      out.close();
      write_meta(sc_out, "score", {sc_model, sc_pairs}, ordered_json::object());
    } else if (app.got_subcommand(segment_cmd)) {
      const auto c = corpus::load_corpus(sg_corpus);
      if (!sg_export.empty()) {
        std::vector<sampling::PairExample> pairs;
        for (const auto& d : c.documents) {
          auto p = inference::adjacent_pairs(d);
          pairs.insert(pairs.end(), p.begin(), p.end());
        }
        ensure_parent(sg_export);
        sampling::save_pairs(sg_export, pairs);
        write_meta(sg_export, "segment", {sg_corpus}, {{"export_pairs", true}});
        return ok;
      }
      if (sg_out.empty()) throw CLI::RequiredError("--out");
      std::unique_ptr<scorers::PairScorer> scorer;
      std::vector<fs::path> inputs{sg_corpus};
      if (!sg_model.empty()) {
        scorer = std::make_unique<scorers::ScorerModel>(scorers::ScorerModel::load(sg_model));
        inputs.push_back(sg_model);
      } else if (!sg_scores.empty()) {
        std::vector<sampling::PairExample> pairs;
        for (const auto& d : c.documents) {
          auto p = inference::adjacent_pairs(d);
          pairs.insert(pairs.end(), p.begin(), p.end());
        }
        std::ifstream in(sg_scores);
        if (!in) throw MissingArtifactError("cannot open scores file " + sg_scores + " (run the external scorer on --export-pairs output)");
        scorer = std::make_unique<scorers::ExternalScores>(scorers::ingest_external_scores(pairs, in));
        inputs.push_back(sg_scores);
      } else {
        throw CLI::RequiredError("--model or --scores");
      }
      auto segs = inference::segment_corpus(c, *scorer, {sg_threshold});
      for (auto& s : segs) s.seed = sg_seed;
      ensure_parent(sg_out);
      inference::save_segmentations(sg_out, segs);
      write_meta(sg_out, "segment", inputs, {{"threshold", sg_threshold}, {"seed", sg_seed}});
    } else if (app.got_subcommand(oracle_cmd)) {
      const auto c = corpus::load_corpus(or_corpus);
      std::vector<inference::Segmentation> segs;
      for (const auto& d : c.documents) segs.push_back(inference::random_oracle_segment(d, as_seed(or_seed)));
      ensure_parent(or_out);
      inference::save_segmentations(or_out, segs);
      write_meta(or_out, "oracle", {or_corpus}, {{"seed", or_seed}});
    } else if (app.got_subcommand(ensemble_cmd)) {
      if (en_inputs.size() < 2) throw ValidationError("ensemble needs at least two runs");
      std::map<std::string, std::vector<inference::Segmentation>> by_doc;
      std::vector<std::string> order;
      std::vector<fs::path> inputs;
      for (const auto& f : en_inputs) {
        inputs.push_back(f);
        for (auto& s : inference::load_segmentations(f)) {
          if (!by_doc.count(s.doc_id)) order.push_back(s.doc_id);
          by_doc[s.doc_id].push_back(std::move(s));
        }
      }
      std::vector<inference::Segmentation> ens;
      for (const auto& id : order) {
        if (by_doc[id].size() != en_inputs.size())
          throw ValidationError("document '" + id + "' is missing from some runs");
        ens.push_back(inference::ensemble_majority(by_doc[id]));
      }
      ensure_parent(en_out);
      inference::save_segmentations(en_out, ens);
      write_meta(en_out, "ensemble", inputs, {{"runs", en_inputs.size()}});
    } else if (app.got_subcommand(evaluate_cmd)) {
      ev_opts.window_mode = metrics::parse_window_mode(ev_mode);
      const auto c = corpus::load_corpus(ev_corpus);
      const auto segs = inference::load_segmentations(ev_segs);
      auto report = metrics::evaluate(c, segs, ev_opts);
      if (ev_runs) report.runs = ev_runs;
      ensure_parent(ev_out);
      metrics::save_report(ev_out, report);
      write_meta(ev_out, "evaluate", {ev_corpus, ev_segs}, {{"window_mode", ev_mode}});
      if (!ev_csv.empty()) {
        std::ofstream csv(ev_csv);
        metrics::write_acc_csv(csv, report.acc_k, report.scorer);
      }
      std::cout << report.scorer << " P_k " << fmt(report.mean_pk) << " (" << ev_mode << ", "
                << report.per_doc.size() << " documents)\n";
    } else if (app.got_subcommand(report_cmd)) {
      std::vector<metrics::EvalReport> reports;
      for (const auto& f : rp_inputs) reports.push_back(metrics::load_report(f));
      std::ostringstream text;
      if (rp_format == "table")
        render_table(text, reports);
      else
        render_csv(text, reports);
      if (rp_out.empty()) {
        std::cout << text.str();
      } else {
        ensure_parent(rp_out);
        std::ofstream(rp_out) << text.str();
      }
    } else if (app.got_subcommand(synth_cmd)) {
      const auto c = synth::generate(sy);
      ensure_parent(sy_out);
      corpus::save_corpus(sy_out, c);
      write_meta(sy_out, "synth", {},
                 {{"documents", sy.documents}, {"topics", sy.topics}, {"vocabulary", sy.vocabulary},
                  {"noise_rate", sy.noise_rate}, {"seed", sy.seed}});
    } else if (app.got_subcommand(run_cmd)) {
      return run_pipeline(rc);
    }
    return ok;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : usage;
  } catch (const MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return missing;
  } catch (const topseg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return validation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return validation;
  }
}
