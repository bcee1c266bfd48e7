#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "topseg/corpus.hpp"
#include "topseg/html.hpp"

namespace topseg::extract {

/// Parses raw page bytes and normalizes the tree:
///  - boilerplate elements (nav, header, footer, aside, script, style, ...)
///    and link-dominated blocks are removed;
///  - block elements nested in paragraphs are hoisted out, splitting the paragraph;
///  - inline runs directly inside containers are wrapped in <p>.
/// Throws ValidationError when no text survives.
TagTree clean_html(std::string_view raw);

/// Share of non-empty text blocks that look English (>= 2 stopword hits).
double english_ratio(const TagTree& tree);

/// True when a stopword-hit count marks the text as English.
bool looks_english(std::string_view text);

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// 1 - distance / max length, after case folding and whitespace collapse.
double normalized_similarity(std::string_view a, std::string_view b);

/// Whether a link text names a terms-of-service page (similarity >= 0.75).
bool match_tos_link(std::string_view link_text);

enum class EnumKind { latin_number, roman_numeral, letter };
enum class EnumPrefix { part, section, article };

struct EnumPattern {
  EnumKind kind;
  std::optional<EnumPrefix> prefix;
  std::string raw;  // matched text: prefix, marker and delimiter

  friend bool operator==(const EnumPattern&, const EnumPattern&) = default;
};

/// Recognizes an enumeration marker at the start of `text` (leading
/// whitespace allowed). Markers are decimal integers, roman numerals i-xxxix
/// or single letters, followed by '.', ')' or ':' and then whitespace or end
/// of text. After a Part/Section/Article prefix the delimiter is optional.
/// Roman numerals win over letters when both readings have the same length.
std::optional<EnumPattern> recognize_enumeration(std::string_view text);

enum class SplitSelector { heading, bold_enum, list_item, underline_enum, paragraph_enum };

std::string_view to_string(SplitSelector selector);

struct SplitRule {
  int priority = 0;
  SplitSelector selector = SplitSelector::heading;
  std::size_t min_occurrences = 5;
};

/// heading, bold+enum, list item, underline+enum, paragraph+enum.
std::vector<SplitRule> default_split_rules(std::size_t min_occurrences = 5);

/// Leaf text unit of a cleaned tree with the cues the split rules look at.
struct TextBlock {
  std::string tag;
  std::string text;
  std::optional<std::string> bold_lead;       // leading <b>/<strong> run
  std::optional<std::string> underline_lead;  // leading <u>/<ins> run
  std::string bold_rest;                      // text after the bold lead
  std::string underline_rest;
  bool list_item_start = false;
};

/// Leaf blocks of a cleaned tree in reading order.
std::vector<TextBlock> text_blocks(const TagTree& tree);

/// Number of blocks each rule selects.
std::size_t count_matches(const std::vector<TextBlock>& blocks, SplitSelector selector);

/// Runs the split-rule cascade. Rules with fewer than min_occurrences
/// matches in the whole document are skipped; each remaining rule adds one
/// heading level. Content before the first split, and documents with no
/// active rule, go to a section whose heading_path is {""}. A split with no
/// content of its own is folded back into the text as an ordinary paragraph.
corpus::Document extract_sections(const TagTree& tree, const std::vector<SplitRule>& rules,
                                  std::string doc_id = {});

struct ExtractOptions {
  std::size_t min_occurrences = 5;
  double min_english_ratio = 0.5;
};

struct ExtractOutcome {
  std::optional<corpus::Document> document;  // empty when rejected
  double english_ratio = 0.0;
  std::string rejection;
};

/// clean_html + language filter + extract_sections for one page.
ExtractOutcome extract_page(std::string_view raw, std::string doc_id, const ExtractOptions& options = {});

}  // namespace topseg::extract
