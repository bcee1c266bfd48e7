#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "topseg/corpus.hpp"

namespace topseg::synth {

/// Planted-topic corpus: every topic owns a disjoint pseudo-word vocabulary;
/// each word slot is replaced by a shared noise word with probability noise_rate.
struct SynthConfig {
  std::size_t documents = 200;
  std::size_t topics = 5;
  std::size_t vocabulary = 50;
  std::size_t noise_vocabulary = 50;
  double noise_rate = 0.1;
  std::size_t min_sections = 3, max_sections = 5;
  std::size_t min_paragraphs = 2, max_paragraphs = 5;
  std::size_t min_words = 20, max_words = 40;
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

/// Topic ids, lower case. The first ones read like ToS headings.
std::vector<std::string> topic_names(std::size_t count);

/// Distinct pseudo word for any index.
std::string pseudo_word(std::size_t index);

/// Labeled corpus; sections within a document carry distinct topics.
corpus::Corpus generate(const SynthConfig& cfg);

}  // namespace topseg::synth
