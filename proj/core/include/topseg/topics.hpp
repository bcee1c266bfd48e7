#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "topseg/corpus.hpp"

namespace topseg::topics {

/// Lowercase, enumeration prefix removed, punctuation removed, whitespace
/// collapsed. Repeats until nothing changes, so it is idempotent.
std::string normalize_heading(std::string_view text);

/// Curated mapping from heading spellings to canonical topic ids.
class AliasTable {
public:
  /// `topics` maps a topic id to its aliases; the id itself is also an alias.
  /// Throws ValidationError if an alias lands in two topics or a topic id is
  /// not already in normalized form.
  AliasTable(const std::map<std::string, std::vector<std::string>>& topics,
             const std::vector<std::string>& blocklist = {});

  static AliasTable load(const std::filesystem::path& path);
  static AliasTable from_json(std::string_view json);

  /// Topic for a raw heading, or nothing if unknown or blocklisted.
  std::optional<std::string> lookup(std::string_view heading) const;

  bool blocked(std::string_view heading) const;
  std::size_t topic_count() const { return topic_ids_.size(); }
  std::size_t alias_count() const { return aliases_.size(); }
  bool empty() const { return aliases_.empty(); }

  /// Topic ids in sorted order; position is the contiguous label.
  const std::vector<std::string>& topic_ids() const { return topic_ids_; }
  std::optional<std::size_t> topic_index(std::string_view topic_id) const;

private:
  std::map<std::string, std::string, std::less<>> aliases_;
  std::set<std::string, std::less<>> blocklist_;
  std::vector<std::string> topic_ids_;
};

/// Labels each section by its top-level heading, drops unmatched sections,
/// then drops documents left without sections. Survivors keep their order.
corpus::Corpus assign_topics(const corpus::Corpus& corpus, const AliasTable& aliases);

struct HeadingCount {
  std::string heading;
  std::size_t count = 0;

  friend bool operator==(const HeadingCount&, const HeadingCount&) = default;
};

/// Normalized top-level headings seen at least `min_count` times, most
/// frequent first, ties alphabetical. Empty normalized headings are ignored.
std::vector<HeadingCount> build_alias_candidates(const corpus::Corpus& corpus, std::size_t min_count = 250);

}  // namespace topseg::topics
