#include "topseg/synth.hpp"

#include <array>
#include <numeric>

#include "topseg/error.hpp"
#include "topseg/random.hpp"

namespace topseg::synth {

namespace {

constexpr std::array<const char*, 16> kSyllables = {"ka", "lo", "mi", "ne", "ru", "sa", "to", "vi",
                                                    "pe", "du", "go", "ba", "fi", "ze", "ho", "ju"};

constexpr std::array<const char*, 12> kTosTopics = {
    "privacy",         "termination",        "limitation of liability", "payment",
    "governing law",   "intellectual property", "warranty disclaimer",  "dispute resolution",
    "user content",    "changes to terms",   "indemnification",         "third party links"};

std::string title_case(const std::string& s) {
  std::string out = s;
  bool start = true;
  for (auto& c : out) {
    if (start && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    start = c == ' ';
  }
  return out;
}

std::size_t in_range(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); }

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.documents == 0) throw ValidationError("synth needs at least one document");
  if (cfg.topics < 2) throw ValidationError("synth needs at least two topics");
  if (cfg.vocabulary == 0 || cfg.noise_vocabulary == 0) throw ValidationError("synth vocabularies must be non-empty");
  if (!(cfg.noise_rate >= 0.0 && cfg.noise_rate < 1.0)) throw ValidationError("noise rate must lie in [0, 1)");
  if (cfg.min_sections < 1 || cfg.min_sections > cfg.max_sections) throw ValidationError("bad section range");
  if (cfg.min_sections > cfg.topics) throw ValidationError("more sections per document than topics");
  if (cfg.min_paragraphs < 1 || cfg.min_paragraphs > cfg.max_paragraphs) throw ValidationError("bad paragraph range");
  if (cfg.min_words < 1 || cfg.min_words > cfg.max_words) throw ValidationError("bad word range");
}

std::vector<std::string> topic_names(std::size_t count) {
  std::vector<std::string> names;
  for (std::size_t t = 0; t < count; ++t)
    names.push_back(t < kTosTopics.size() ? kTosTopics[t] : "topic " + pseudo_word(t));
  return names;
}

std::string pseudo_word(std::size_t index) {
  std::string w;
  std::size_t x = index;
  for (int i = 0; i < 3 || x > 0; ++i) {
    w += kSyllables[x % kSyllables.size()];
    x /= kSyllables.size();
  }
  return w;
}

corpus::Corpus generate(const SynthConfig& cfg) {
  validate(cfg);
  const auto names = topic_names(cfg.topics);
  const std::size_t noise_base = cfg.topics * cfg.vocabulary;
  const std::size_t max_sections = std::min(cfg.max_sections, cfg.topics);
  Rng rng(derive_seed(cfg.seed, "synth"));
  corpus::Corpus out;
  out.documents.reserve(cfg.documents);
  std::vector<std::size_t> order(cfg.topics);
  for (std::size_t d = 0; d < cfg.documents; ++d) {
    corpus::Document doc;
    doc.id = "synth-" + std::to_string(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    const std::size_t sections = in_range(rng, cfg.min_sections, max_sections);
    for (std::size_t s = 0; s < sections; ++s) {
      const std::size_t topic = order[s];
      corpus::Section sec;
      sec.heading_path = {std::to_string(s + 1) + ". " + title_case(names[topic])};
      sec.topic_id = names[topic];
      const std::size_t paragraphs = in_range(rng, cfg.min_paragraphs, cfg.max_paragraphs);
      for (std::size_t p = 0; p < paragraphs; ++p) {
        const std::size_t words = in_range(rng, cfg.min_words, cfg.max_words);
        std::string text;
        for (std::size_t w = 0; w < words; ++w) {
          const std::size_t id = rng.bernoulli(cfg.noise_rate) ? noise_base + rng.below(cfg.noise_vocabulary)
                                                               : topic * cfg.vocabulary + rng.below(cfg.vocabulary);
          if (w) text += ' ';
          text += pseudo_word(id);
        }
        text += '.';
        sec.paragraphs.push_back(std::move(text));
      }
      doc.sections.push_back(std::move(sec));
    }
    out.documents.push_back(std::move(doc));
  }
  return out;
}

}  // namespace topseg::synth
