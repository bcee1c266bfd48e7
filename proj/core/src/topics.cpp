#include "topseg/topics.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "topseg/error.hpp"
#include "topseg/extract.hpp"
#include "topseg/text.hpp"

namespace topseg::topics {

namespace {

std::string normalize_once(std::string_view in) {
  std::string s = text::collapse_whitespace(text::to_lower(in));
  while (auto e = extract::recognize_enumeration(s)) {
    const auto pos = s.find(e->raw);
    s = text::collapse_whitespace(std::string_view(s).substr(pos + e->raw.size()));
  }
  std::string out;
  for (char32_t cp : text::decode_utf8(s)) {
    if (cp == '\'' || cp == 0x2019) continue;
    if (text::is_punct(cp))
      out.push_back(' ');
    else
      text::append_utf8(out, cp);
  }
  return text::collapse_whitespace(out);
}

}  // namespace

std::string normalize_heading(std::string_view text) {
  std::string current = normalize_once(text);
  for (;;) {
    std::string next = normalize_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

AliasTable::AliasTable(const std::map<std::string, std::vector<std::string>>& topics,
                       const std::vector<std::string>& blocklist) {
  for (const auto& b : blocklist) blocklist_.insert(normalize_heading(b));
  for (const auto& [id, aliases] : topics) {
    if (id.empty() || normalize_heading(id) != id)
      throw ValidationError("topic id '" + id + "' is not in normalized form ('" + normalize_heading(id) + "')");
    topic_ids_.push_back(id);
    auto add = [&](const std::string& alias) {
      const std::string key = normalize_heading(alias);
      if (key.empty()) return;
      auto [it, inserted] = aliases_.emplace(key, id);
      if (!inserted && it->second != id)
        throw ValidationError("alias '" + key + "' maps to both '" + it->second + "' and '" + id + "'");
    };
    add(id);
    for (const auto& a : aliases) add(a);
  }
}

AliasTable AliasTable::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("alias table is not valid JSON: ") + e.what());
  }
  try {
    std::map<std::string, std::vector<std::string>> topics;
    for (const auto& [id, aliases] : j.at("topics").items()) topics[id] = aliases.get<std::vector<std::string>>();
    std::vector<std::string> blocklist;
    if (j.contains("blocklist")) blocklist = j.at("blocklist").get<std::vector<std::string>>();
    return AliasTable(topics, blocklist);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("alias table has the wrong shape: ") + e.what());
  }
}

AliasTable AliasTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifactError("cannot open alias table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

bool AliasTable::blocked(std::string_view heading) const {
  return blocklist_.contains(normalize_heading(heading));
}

std::optional<std::string> AliasTable::lookup(std::string_view heading) const {
  const std::string key = normalize_heading(heading);
  if (key.empty() || blocklist_.contains(key)) return std::nullopt;
  auto it = aliases_.find(key);
  if (it == aliases_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> AliasTable::topic_index(std::string_view topic_id) const {
  auto it = std::lower_bound(topic_ids_.begin(), topic_ids_.end(), topic_id);
  if (it == topic_ids_.end() || *it != topic_id) return std::nullopt;
  return static_cast<std::size_t>(it - topic_ids_.begin());
}

corpus::Corpus assign_topics(const corpus::Corpus& corpus, const AliasTable& aliases) {
  if (aliases.empty()) throw ValidationError("alias table is empty");
  corpus::Corpus out;
  out.split_tag = corpus.split_tag;
  for (const auto& doc : corpus.documents) {
    corpus::Document kept{doc.id, doc.source_url, {}};
    for (const auto& sec : doc.sections) {
      if (sec.heading_path.empty())
        throw ValidationError("document '" + doc.id + "' has a section without heading_path");
      if (auto topic = aliases.lookup(sec.heading_path.front())) {
        kept.sections.push_back(sec);
        kept.sections.back().topic_id = std::move(topic);
      }
    }
    if (!kept.sections.empty()) out.documents.push_back(std::move(kept));
  }
  return out;
}

std::vector<HeadingCount> build_alias_candidates(const corpus::Corpus& corpus, std::size_t min_count) {
  if (min_count < 1) throw ValidationError("min_count must be at least 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : corpus.documents)
    for (const auto& sec : doc.sections) {
      if (sec.heading_path.empty()) continue;
      std::string key = normalize_heading(sec.heading_path.front());
      if (!key.empty()) ++counts[std::move(key)];
    }
  std::vector<HeadingCount> out;
  for (auto& [heading, count] : counts)
    if (count >= min_count) out.push_back({heading, count});
  std::sort(out.begin(), out.end(), [](const HeadingCount& a, const HeadingCount& b) {
    return a.count != b.count ? a.count > b.count : a.heading < b.heading;
  });
  return out;
}

}  // namespace topseg::topics
