#include "topseg/extract.hpp"

#include <algorithm>
#include <array>
#include <span>
#include <unordered_set>

#include "topseg/error.hpp"
#include "topseg/text.hpp"

namespace topseg::extract {

namespace {

const std::unordered_set<std::string_view> kBoilerplate = {
    "script", "style", "noscript", "template", "head",   "title", "nav",    "header", "footer",
    "aside",  "iframe", "svg",     "button",   "select", "option", "textarea", "input", "object",
    "embed",  "canvas", "meta",    "link",     "menu",   "dialog"};

const std::unordered_set<std::string_view> kBoilerplateRoles = {"navigation", "banner", "contentinfo",
                                                                "complementary", "search"};

// Blocks judged by link density. Page-level wrappers are exempt.
const std::unordered_set<std::string_view> kDensityBlocks = {"div", "ul", "ol", "li", "p",  "table",
                                                             "tr",  "td", "dl", "dd", "section"};

bool is_block(const Node& n) { return !n.is_text() && !is_inline_tag(n.tag); }

bool has_visible_text(const Node& n) {
  const auto cps = text::decode_utf8(raw_text(n));
  return std::any_of(cps.begin(), cps.end(), [](char32_t c) { return !text::is_space(c); });
}

bool is_boilerplate(const Node& n) {
  if (n.is_text()) return false;
  if (kBoilerplate.contains(n.tag)) return true;
  if (auto role = n.attribute("role"); role && kBoilerplateRoles.contains(*role)) return true;
  return n.attribute("hidden").has_value();
}

void drop_boilerplate(Node& n) {
  std::erase_if(n.children, is_boilerplate);
  for (auto& c : n.children) drop_boilerplate(c);
}

struct TextMass {
  std::size_t total = 0;
  std::size_t linked = 0;
};

void measure(const Node& n, bool in_link, TextMass& m) {
  if (n.is_text()) {
    for (char32_t c : text::decode_utf8(n.text))
      if (!text::is_space(c)) {
        ++m.total;
        if (in_link) ++m.linked;
      }
    return;
  }
  for (const auto& c : n.children) measure(c, in_link || n.tag == "a", m);
}

void drop_link_dense(Node& n) {
  for (auto& c : n.children)
    if (!c.is_text()) drop_link_dense(c);
  std::erase_if(n.children, [](const Node& c) {
    if (c.is_text() || !kDensityBlocks.contains(c.tag)) return false;
    TextMass m;
    measure(c, false, m);
    return m.total > 0 && 2 * m.linked > m.total;
  });
}

void append_flattened(std::vector<Node>& out, std::vector<Node>&& nodes) {
  for (auto& n : nodes) {
    if (is_block(n)) {
      out.push_back(Node::make_text(" "));
      append_flattened(out, std::move(n.children));
      out.push_back(Node::make_text(" "));
    } else {
      out.push_back(std::move(n));
    }
  }
}

// Groups inline runs into paragraphs; whitespace-only runs disappear.
std::vector<Node> wrap_inline_runs(std::vector<Node>&& kids, const char* wrapper = "p") {
  std::vector<Node> out;
  std::vector<Node> run;
  auto flush = [&] {
    Node p = Node::element(wrapper);
    p.children = std::move(run);
    run.clear();
    if (has_visible_text(p)) out.push_back(std::move(p));
  };
  for (auto& k : kids) {
    if (is_block(k)) {
      flush();
      out.push_back(std::move(k));
    } else {
      run.push_back(std::move(k));
    }
  }
  flush();
  return out;
}

std::vector<Node> normalize(Node&& n) {
  if (n.is_text()) {
    std::vector<Node> out;
    out.push_back(std::move(n));
    return out;
  }
  std::vector<Node> kids;
  for (auto& c : n.children) {
    auto part = normalize(std::move(c));
    std::move(part.begin(), part.end(), std::back_inserter(kids));
  }
  const bool has_block = std::any_of(kids.begin(), kids.end(), is_block);
  std::vector<Node> out;
  if (is_inline_tag(n.tag)) {
    if (has_block) return kids;  // an inline wrapper around blocks dissolves
    n.children = std::move(kids);
  } else if (is_heading_tag(n.tag)) {
    n.children.clear();
    append_flattened(n.children, std::move(kids));
  } else if (n.tag == "p") {
    if (has_block) return wrap_inline_runs(std::move(kids));
    n.children = std::move(kids);
  } else {
    n.children = has_block || !is_text_block_tag(n.tag) ? wrap_inline_runs(std::move(kids)) : std::move(kids);
  }
  out.push_back(std::move(n));
  return out;
}

// Removes text blocks without text and containers left empty.
void prune(Node& n) {
  for (auto& c : n.children)
    if (is_block(c)) prune(c);
  std::erase_if(n.children, [](const Node& c) {
    if (!is_block(c)) return false;
    const bool leaf = std::none_of(c.children.begin(), c.children.end(), is_block);
    return leaf ? !has_visible_text(c) : c.children.empty();
  });
}

TagTree clean_tree(Node&& parsed) {
  drop_boilerplate(parsed);
  drop_link_dense(parsed);
  TagTree tree;
  tree.root.children = wrap_inline_runs(std::move(normalize(std::move(parsed)).front().children));
  prune(tree.root);
  if (!has_visible_text(tree.root)) throw ValidationError("document has no extractable text");
  return tree;
}

std::optional<std::string> canonical_url(const Node& n) {
  if (n.is_element("link")) {
    auto rel = n.attribute("rel");
    auto href = n.attribute("href");
    if (rel && href && text::to_lower(*rel) == "canonical" && !href->empty()) return std::string(*href);
  }
  for (const auto& c : n.children)
    if (auto url = canonical_url(c)) return url;
  return std::nullopt;
}

// --- enumeration grammar -------------------------------------------------

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Length of a whitespace run at `pos` (ASCII whitespace and U+00A0).
std::size_t space_run(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  while (i < s.size()) {
    if (is_ascii_space(s[i])) {
      ++i;
    } else if (s.compare(i, 2, "\xC2\xA0") == 0) {
      i += 2;
    } else {
      break;
    }
  }
  return i - pos;
}

bool roman_value_ok(std::string_view s) {
  std::string lower;
  for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::size_t i = 0;
  int tens = 0;
  while (i < lower.size() && lower[i] == 'x' && tens < 3) ++i, ++tens;
  static constexpr std::array<std::string_view, 10> kUnits = {"", "i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix"};
  const std::string_view rest = std::string_view(lower).substr(i);
  const bool unit_ok = std::find(kUnits.begin(), kUnits.end(), rest) != kUnits.end();
  return unit_ok && (tens > 0 || !rest.empty());
}

struct MarkerMatch {
  EnumKind kind;
  std::size_t end;  // one past the delimiter, or past the marker when no delimiter is needed
};

// Terminator check: delimiter then whitespace/end, or (after a prefix) whitespace/end alone.
std::optional<std::size_t> terminator_end(std::string_view s, std::size_t pos, bool prefixed) {
  if (pos < s.size() && (s[pos] == '.' || s[pos] == ')' || s[pos] == ':')) {
    if (pos + 1 == s.size() || space_run(s, pos + 1) > 0) return pos + 1;
  }
  if (prefixed && (pos == s.size() || space_run(s, pos) > 0)) return pos;
  return std::nullopt;
}

std::optional<MarkerMatch> match_marker(std::string_view s, std::size_t pos, bool prefixed) {
  std::optional<MarkerMatch> best;
  auto consider = [&](EnumKind kind, std::size_t len) {
    if (auto end = terminator_end(s, pos + len, prefixed)) {
      if (!best || *end > best->end) best = MarkerMatch{kind, *end};
    }
  };
  std::size_t d = pos;
  while (d < s.size() && std::isdigit(static_cast<unsigned char>(s[d]))) ++d;
  if (d > pos) consider(EnumKind::latin_number, d - pos);

  std::size_t r = pos;
  while (r < s.size() && std::string_view("ivxIVX").find(s[r]) != std::string_view::npos) ++r;
  for (std::size_t len = r - pos; len >= 1; --len)
    if (roman_value_ok(s.substr(pos, len))) consider(EnumKind::roman_numeral, len);

  // Letters only replace a roman reading that is strictly shorter.
  if (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) {
    if (auto end = terminator_end(s, pos + 1, prefixed); end && (!best || *end > best->end))
      best = MarkerMatch{EnumKind::letter, *end};
  }
  return best;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

// --- split cascade -------------------------------------------------------

constexpr std::array<std::string_view, 50> kStopwords = {
    "the",   "of",    "and",   "to",    "a",     "is",    "that",   "for",   "it",    "as",
    "with",  "on",    "be",    "by",    "this",  "are",   "or",     "at",    "from",  "not",
    "have",  "has",   "you",   "your",  "we",    "our",   "us",     "they",  "their", "which",
    "will",  "may",   "any",   "all",   "if",    "can",   "shall",  "such",  "these", "those",
    "its",   "been",  "would", "other", "than",  "more",  "were",   "there", "should", "must"};

const Node* find_lead(const Node& n, std::initializer_list<std::string_view> tags) {
  for (const auto& c : n.children) {
    if (c.is_text()) {
      if (has_visible_text(c)) return nullptr;
      continue;
    }
    if (std::find(tags.begin(), tags.end(), c.tag) != tags.end()) return has_visible_text(c) ? &c : nullptr;
    if (!has_visible_text(c)) continue;
    return is_inline_tag(c.tag) ? find_lead(c, tags) : nullptr;
  }
  return nullptr;
}

void gather(const Node& n, const Node* target, std::string& buf, std::size_t& start, std::size_t& end) {
  if (&n == target) start = buf.size();
  if (n.is_text()) {
    buf += n.text;
  } else if (n.tag == "br") {
    buf += ' ';
  } else {
    for (const auto& c : n.children) gather(c, target, buf, start, end);
  }
  if (&n == target) end = buf.size();
}

void split_lead(const Node& block, std::initializer_list<std::string_view> tags, std::optional<std::string>& lead,
                std::string& rest) {
  const Node* target = find_lead(block, tags);
  if (!target) return;
  std::string buf;
  std::size_t start = 0, end = 0;
  gather(block, target, buf, start, end);
  lead = text::collapse_whitespace(std::string_view(buf).substr(start, end - start));
  rest = text::collapse_whitespace(std::string_view(buf).substr(end));
}

void collect_blocks(const Node& n, std::vector<TextBlock>& out, bool& list_pending) {
  const bool leaf = std::none_of(n.children.begin(), n.children.end(), is_block);
  if (leaf) {
    TextBlock b;
    b.tag = n.tag;
    b.text = text_content(n);
    b.list_item_start = n.tag == "li" || list_pending;
    list_pending = false;
    split_lead(n, {"b", "strong"}, b.bold_lead, b.bold_rest);
    split_lead(n, {"u", "ins"}, b.underline_lead, b.underline_rest);
    out.push_back(std::move(b));
    return;
  }
  if (n.tag == "li") list_pending = true;
  for (const auto& c : n.children)
    if (is_block(c)) collect_blocks(c, out, list_pending);
}

bool matches(const TextBlock& b, SplitSelector sel) {
  switch (sel) {
    case SplitSelector::heading: return is_heading_tag(b.tag);
    case SplitSelector::bold_enum: return b.bold_lead && recognize_enumeration(*b.bold_lead).has_value();
    case SplitSelector::list_item: return b.list_item_start;
    case SplitSelector::underline_enum:
      return b.underline_lead && recognize_enumeration(*b.underline_lead).has_value();
    case SplitSelector::paragraph_enum: return b.tag == "p" && recognize_enumeration(b.text).has_value();
  }
  return false;
}

struct Title {
  std::string heading;
  std::string rest;
};

// "3. Fees are due" -> heading "3.", rest "Fees are due"
Title marker_title(const std::string& text) {
  const auto m = recognize_enumeration(text);
  if (!m) return {text, {}};
  std::string rest = text::collapse_whitespace(std::string_view(text).substr(text.find(m->raw) + m->raw.size()));
  if (rest.empty()) return {text, {}};
  return {text::collapse_whitespace(m->raw), std::move(rest)};
}

Title title_of(const TextBlock& b, SplitSelector sel) {
  switch (sel) {
    case SplitSelector::bold_enum: return {*b.bold_lead, b.bold_rest};
    case SplitSelector::underline_enum: return {*b.underline_lead, b.underline_rest};
    case SplitSelector::list_item:
      if (b.bold_lead && !b.bold_rest.empty()) return {*b.bold_lead, b.bold_rest};
      if (b.underline_lead && !b.underline_rest.empty()) return {*b.underline_lead, b.underline_rest};
      return marker_title(b.text);
    case SplitSelector::paragraph_enum: return marker_title(b.text);
    default: return {b.text, {}};
  }
}

// A block, or the remainder of a block whose lead became a heading.
struct Piece {
  const TextBlock* block;
  std::optional<std::string> remainder;

  const std::string& text() const { return remainder ? *remainder : block->text; }
  bool matches(SplitSelector sel) const { return !remainder && extract::matches(*block, sel); }
};

class Cascade {
public:
  explicit Cascade(std::vector<SplitSelector> active) : active_(std::move(active)) {}

  std::vector<corpus::Section> split(std::span<const Piece> pieces, std::size_t level,
                                     const std::vector<std::string>& path) const {
    std::vector<corpus::Section> out;
    if (pieces.empty()) return out;
    if (level == active_.size()) {
      corpus::Section s;
      s.heading_path = path.empty() ? std::vector<std::string>{""} : path;
      for (const auto& p : pieces) s.paragraphs.push_back(p.text());
      out.push_back(std::move(s));
      return out;
    }
    const SplitSelector sel = active_[level];
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < pieces.size(); ++i)
      if (pieces[i].matches(sel)) hits.push_back(i);
    if (hits.empty()) return split(pieces, level + 1, path);

    out = split(pieces.first(hits.front()), level + 1, path);
    for (std::size_t h = 0; h < hits.size(); ++h) {
      const std::size_t begin = hits[h] + 1;
      const std::size_t end = h + 1 < hits.size() ? hits[h + 1] : pieces.size();
      Title title = title_of(*pieces[hits[h]].block, sel);
      std::vector<Piece> body;
      if (!title.rest.empty()) body.push_back({pieces[hits[h]].block, title.rest});
      body.insert(body.end(), pieces.begin() + begin, pieces.begin() + end);
      auto sub_path = path;
      sub_path.push_back(title.heading);
      auto sub = split(body, level + 1, sub_path);
      if (sub.empty()) {
        if (out.empty()) {
          corpus::Section s;
          s.heading_path = path.empty() ? std::vector<std::string>{""} : path;
          out.push_back(std::move(s));
        }
        out.back().paragraphs.push_back(std::move(title.heading));
      } else {
        std::move(sub.begin(), sub.end(), std::back_inserter(out));
      }
    }
    return out;
  }

private:
  std::vector<SplitSelector> active_;
};

}  // namespace

TagTree clean_html(std::string_view raw) { return clean_tree(parse_html(decode_page(raw))); }

bool looks_english(std::string_view text) {
  std::size_t hits = 0;
  for (const auto& tok : text::tokenize(text))
    if (std::find(kStopwords.begin(), kStopwords.end(), tok) != kStopwords.end() && ++hits >= 2) return true;
  return false;
}

double english_ratio(const TagTree& tree) {
  std::size_t total = 0;
  std::size_t english = 0;
  for (const auto& b : text_blocks(tree)) {
    if (b.text.empty()) continue;
    ++total;
    if (looks_english(b.text)) ++english;
  }
  return total == 0 ? 0.0 : static_cast<double>(english) / static_cast<double>(total);
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double normalized_similarity(std::string_view a, std::string_view b) {
  const auto ua = text::decode_utf8(text::to_lower(text::collapse_whitespace(a)));
  const auto ub = text::decode_utf8(text::to_lower(text::collapse_whitespace(b)));
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(ua, ub)) / static_cast<double>(longest);
}

bool match_tos_link(std::string_view link_text) {
  static constexpr std::array<std::string_view, 4> kTargets = {"Terms of Service", "Terms of Use",
                                                               "Terms and Conditions", "Conditions of Use"};
  return std::any_of(kTargets.begin(), kTargets.end(),
                     [&](std::string_view t) { return normalized_similarity(link_text, t) >= 0.75; });
}

std::optional<EnumPattern> recognize_enumeration(std::string_view text) {
  const std::size_t start = space_run(text, 0);
  static constexpr std::array<std::pair<std::string_view, EnumPrefix>, 3> kPrefixes = {
      {{"part", EnumPrefix::part}, {"section", EnumPrefix::section}, {"article", EnumPrefix::article}}};
  for (const auto& [word, prefix] : kPrefixes) {
    if (text.size() - start <= word.size() || !iequals(text.substr(start, word.size()), word)) continue;
    const std::size_t gap = space_run(text, start + word.size());
    if (gap == 0) continue;
    if (auto m = match_marker(text, start + word.size() + gap, true))
      return EnumPattern{m->kind, prefix, std::string(text.substr(start, m->end - start))};
  }
  if (auto m = match_marker(text, start, false))
    return EnumPattern{m->kind, std::nullopt, std::string(text.substr(start, m->end - start))};
  return std::nullopt;
}

std::string_view to_string(SplitSelector selector) {
  switch (selector) {
    case SplitSelector::heading: return "heading";
    case SplitSelector::bold_enum: return "bold_enum";
    case SplitSelector::list_item: return "list_item";
    case SplitSelector::underline_enum: return "underline_enum";
    case SplitSelector::paragraph_enum: return "paragraph_enum";
  }
  return "heading";
}

std::vector<SplitRule> default_split_rules(std::size_t min_occurrences) {
  return {{0, SplitSelector::heading, min_occurrences},
          {1, SplitSelector::bold_enum, min_occurrences},
          {2, SplitSelector::list_item, min_occurrences},
          {3, SplitSelector::underline_enum, min_occurrences},
          {4, SplitSelector::paragraph_enum, min_occurrences}};
}

std::vector<TextBlock> text_blocks(const TagTree& tree) {
  std::vector<TextBlock> out;
  bool list_pending = false;
  for (const auto& c : tree.root.children)
    if (is_block(c)) collect_blocks(c, out, list_pending);
  return out;
}

std::size_t count_matches(const std::vector<TextBlock>& blocks, SplitSelector selector) {
  return static_cast<std::size_t>(
      std::count_if(blocks.begin(), blocks.end(), [&](const TextBlock& b) { return matches(b, selector); }));
}

corpus::Document extract_sections(const TagTree& tree, const std::vector<SplitRule>& rules, std::string doc_id) {
  auto ordered = rules;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const SplitRule& a, const SplitRule& b) { return a.priority < b.priority; });
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i].priority == ordered[i - 1].priority)
      throw ValidationError("split rule priorities must be distinct");

  const auto blocks = text_blocks(tree);
  std::vector<SplitSelector> active;
  for (const auto& r : ordered)
    if (count_matches(blocks, r.selector) >= std::max<std::size_t>(r.min_occurrences, 1)) active.push_back(r.selector);

  std::vector<Piece> pieces;
  pieces.reserve(blocks.size());
  for (const auto& b : blocks)
    if (!b.text.empty()) pieces.push_back({&b, std::nullopt});

  corpus::Document doc;
  doc.id = std::move(doc_id);
  doc.sections = Cascade(std::move(active)).split(pieces, 0, {});
  return doc;
}

ExtractOutcome extract_page(std::string_view raw, std::string doc_id, const ExtractOptions& options) {
  ExtractOutcome outcome;
  Node parsed = parse_html(decode_page(raw));
  auto url = canonical_url(parsed);
  TagTree tree;
  try {
    tree = clean_tree(std::move(parsed));
  } catch (const ValidationError& e) {
    outcome.rejection = e.what();
    return outcome;
  }
  outcome.english_ratio = english_ratio(tree);
  if (outcome.english_ratio < options.min_english_ratio) {
    outcome.rejection = "english ratio " + std::to_string(outcome.english_ratio) + " below threshold";
    return outcome;
  }
  corpus::Document doc = extract_sections(tree, default_split_rules(options.min_occurrences), std::move(doc_id));
  doc.source_url = std::move(url);
  outcome.document = std::move(doc);
  return outcome;
}

}  // namespace topseg::extract
