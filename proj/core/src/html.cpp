#include "topseg/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <unordered_map>
#include <unordered_set>

#include "topseg/text.hpp"

namespace topseg::extract {

namespace {

bool iequals_prefix(std::string_view s, std::size_t pos, std::string_view lit) {
  if (s.size() - pos < lit.size()) return false;
  for (std::size_t i = 0; i < lit.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != lit[i]) return false;
  return true;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == ':' || c == '_';
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

const std::unordered_set<std::string_view> kVoid = {"area", "base", "br", "col", "embed", "hr", "img",
                                                    "input", "link", "meta", "param", "source",
                                                    "track", "wbr"};

const std::unordered_set<std::string_view> kRawText = {"script", "style", "textarea", "title", "xmp",
                                                       "noscript"};

const std::unordered_set<std::string_view> kInline = {
    "a",    "abbr", "b",     "bdi",   "bdo",    "big",  "cite", "code", "data", "dfn",  "em",
    "font", "i",    "kbd",   "label", "mark",   "q",    "s",    "samp", "small", "span", "strike",
    "strong", "sub", "sup",  "time",  "tt",     "u",    "var",  "wbr",  "br",   "img",  "ins",
    "del",  "nobr", "acronym"};

// block starts that end an open <p>
const std::unordered_set<std::string_view> kClosesParagraph = {
    "address", "article", "aside", "blockquote", "details", "div",    "dl",     "fieldset", "figcaption",
    "figure",  "footer",  "form",  "h1",         "h2",      "h3",     "h4",     "h5",       "h6",
    "header",  "hr",      "main",  "menu",       "nav",     "ol",     "p",      "pre",      "section",
    "table",   "ul"};

const std::unordered_set<std::string_view> kTextBlock = {"p",  "h1", "h2", "h3", "h4", "h5", "h6",
                                                         "li", "dt", "dd", "td", "th", "pre",
                                                         "caption", "figcaption", "address",
                                                         "summary", "legend"};

const std::unordered_set<std::string_view> kHeadContent = {"title", "meta", "link", "script", "style",
                                                           "base", "noscript", "template"};

const std::unordered_map<std::string_view, char32_t> kEntities = {
    {"amp", '&'},       {"lt", '<'},        {"gt", '>'},        {"quot", '"'},      {"apos", '\''},
    {"nbsp", 0x00A0},   {"ensp", 0x2002},   {"emsp", 0x2003},   {"thinsp", 0x2009}, {"ndash", 0x2013},
    {"mdash", 0x2014},  {"lsquo", 0x2018},  {"rsquo", 0x2019},  {"sbquo", 0x201A},  {"ldquo", 0x201C},
    {"rdquo", 0x201D},  {"bdquo", 0x201E},  {"hellip", 0x2026}, {"bull", 0x2022},   {"middot", 0x00B7},
    {"copy", 0x00A9},   {"reg", 0x00AE},    {"trade", 0x2122},  {"sect", 0x00A7},   {"para", 0x00B6},
    {"laquo", 0x00AB},  {"raquo", 0x00BB},  {"euro", 0x20AC},   {"pound", 0x00A3},  {"yen", 0x00A5},
    {"cent", 0x00A2},   {"deg", 0x00B0},    {"times", 0x00D7},  {"divide", 0x00F7}, {"shy", 0x00AD},
    {"auml", 0x00E4},   {"ouml", 0x00F6},   {"uuml", 0x00FC},   {"Auml", 0x00C4},   {"Ouml", 0x00D6},
    {"Uuml", 0x00DC},   {"szlig", 0x00DF},  {"eacute", 0x00E9}, {"egrave", 0x00E8}, {"ecirc", 0x00EA},
    {"aacute", 0x00E1}, {"agrave", 0x00E0}, {"acirc", 0x00E2},  {"iacute", 0x00ED}, {"oacute", 0x00F3},
    {"uacute", 0x00FA}, {"ntilde", 0x00F1}, {"ccedil", 0x00E7}, {"Eacute", 0x00C9}, {"iexcl", 0x00A1},
    {"iquest", 0x00BF}, {"zwsp", 0x200B},   {"dagger", 0x2020}, {"prime", 0x2032}};

// Open-element stack over a tree whose nodes are addressed by pointer. Only
// the deepest open node ever receives children, so ancestor pointers stay valid.
class TreeBuilder {
public:
  TreeBuilder() : root_(Node::element("#document")) { stack_.push_back(&root_); }

  void text(std::string s) {
    if (s.empty()) return;
    if (stack_.back()->tag == "head" && !std::all_of(s.begin(), s.end(), is_ws)) close_named("head", {});
    Node& top = *stack_.back();
    if (!top.children.empty() && top.children.back().is_text())
      top.children.back().text += s;
    else
      top.children.push_back(Node::make_text(std::move(s)));
  }

  void start(std::string tag, std::vector<std::pair<std::string, std::string>> attrs, bool self_closing) {
    if (tag == "html" || tag == "body") {
      if (tag == "body") close_named("head", {});
      return;
    }
    if (!kHeadContent.contains(tag)) close_named("head", {});
    apply_implied_ends(tag);
    Node& top = *stack_.back();
    Node el = Node::element(tag);
    el.attributes = std::move(attrs);
    top.children.push_back(std::move(el));
    if (!self_closing && !kVoid.contains(tag)) stack_.push_back(&top.children.back());
  }

  void end(const std::string& tag) {
    if (tag == "html" || tag == "body" || tag == "br") return;
    close_named(tag, {});
  }

  Node finish() { return std::move(root_); }

private:
  // Pops through the nearest open `tag`, unless a barrier element sits between.
  bool close_named(std::string_view tag, std::initializer_list<std::string_view> barriers) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const std::string& open = stack_[i]->tag;
      if (open == tag) {
        stack_.resize(i);
        return true;
      }
      if (std::find(barriers.begin(), barriers.end(), open) != barriers.end()) return false;
    }
    return false;
  }

  bool only_inline_above(std::string_view tag) const {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == tag) return true;
      if (!kInline.contains(stack_[i]->tag)) return false;
    }
    return false;
  }

  void apply_implied_ends(std::string_view tag) {
    if (kClosesParagraph.contains(tag) && only_inline_above("p")) close_named("p", {});
    if (tag == "li") {
      close_named("li", {"ul", "ol", "menu"});
    } else if (tag == "dt" || tag == "dd") {
      if (!close_named("dt", {"dl", "dd"})) close_named("dd", {"dl", "dt"});
    } else if (tag == "tr") {
      close_named("tr", {"table", "thead", "tbody", "tfoot"});
    } else if (tag == "td" || tag == "th") {
      if (!close_named("td", {"tr", "table", "th"})) close_named("th", {"tr", "table", "td"});
    } else if (tag == "thead" || tag == "tbody" || tag == "tfoot") {
      for (auto t : {"thead", "tbody", "tfoot"}) close_named(t, {"table"});
    } else if (is_heading_tag(tag)) {
      if (is_heading_tag(stack_.back()->tag)) stack_.pop_back();
    } else if (tag == "option") {
      close_named("option", {"select"});
    }
  }

  Node root_;
  std::vector<Node*> stack_;
};

std::size_t skip_to(std::string_view s, std::size_t pos, std::string_view needle) {
  auto found = s.find(needle, pos);
  return found == std::string_view::npos ? s.size() : found + needle.size();
}

std::optional<std::string> declared_charset(std::string_view raw) {
  const std::string head = ascii_lower(raw.substr(0, 4096));
  auto pos = head.find("charset");
  while (pos != std::string::npos) {
    std::size_t i = pos + 7;
    while (i < head.size() && is_ws(head[i])) ++i;
    if (i < head.size() && head[i] == '=') {
      ++i;
      while (i < head.size() && (is_ws(head[i]) || head[i] == '"' || head[i] == '\'')) ++i;
      std::size_t j = i;
      while (j < head.size() && (std::isalnum(static_cast<unsigned char>(head[j])) || head[j] == '-' || head[j] == '_'))
        ++j;
      if (j > i) return head.substr(i, j - i);
    }
    pos = head.find("charset", pos + 7);
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string_view> Node::attribute(std::string_view name) const {
  for (const auto& [k, v] : attributes)
    if (k == name) return v;
  return std::nullopt;
}

bool is_inline_tag(std::string_view tag) { return kInline.contains(tag); }
bool is_text_block_tag(std::string_view tag) { return kTextBlock.contains(tag); }
bool is_heading_tag(std::string_view tag) {
  return tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6';
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view name = s.substr(i + 1, semi - i - 1);
    std::optional<char32_t> cp;
    if (name.size() > 1 && name[0] == '#') {
      unsigned long value = 0;
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const char* first = name.data() + (hex ? 2 : 1);
      const char* last = name.data() + name.size();
      auto [ptr, ec] = std::from_chars(first, last, value, hex ? 16 : 10);
      if (ec == std::errc() && ptr == last && first != last) {
        if (value == 0 || value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) value = 0xFFFD;
        if (value >= 0x80 && value < 0xA0) {
          // Numeric references in the C1 range mean windows-1252 in practice.
          const std::string mapped = text::cp1252_to_utf8(std::string(1, static_cast<char>(value)));
          out += mapped;
          i = semi + 1;
          continue;
        }
        cp = static_cast<char32_t>(value);
      }
    } else if (auto it = kEntities.find(name); it != kEntities.end()) {
      cp = it->second;
    }
    if (!cp) {
      out.push_back(s[i++]);
      continue;
    }
    text::append_utf8(out, *cp);
    i = semi + 1;
  }
  return out;
}

std::string decode_page(std::string_view raw) {
  if (raw.size() >= 3 && raw.substr(0, 3) == "\xEF\xBB\xBF") raw.remove_prefix(3);
  if (auto cs = declared_charset(raw)) {
    if (*cs == "windows-1252" || *cs == "iso-8859-1" || *cs == "latin1" || *cs == "latin-1" ||
        *cs == "iso-8859-15" || *cs == "cp1252" || *cs == "us-ascii")
      return text::cp1252_to_utf8(raw);
  }
  return text::sanitize_utf8(raw);
}

Node parse_html(std::string_view s) {
  TreeBuilder builder;
  std::size_t i = 0;
  std::size_t text_start = 0;
  auto flush_text = [&](std::size_t end) {
    if (end > text_start) builder.text(decode_entities(s.substr(text_start, end - text_start)));
  };
  while (i < s.size()) {
    if (s[i] != '<') {
      ++i;
      continue;
    }
    if (s.compare(i, 4, "<!--") == 0) {
      flush_text(i);
      i = skip_to(s, i + 4, "-->");
      text_start = i;
      continue;
    }
    if (i + 1 < s.size() && (s[i + 1] == '!' || s[i + 1] == '?')) {
      flush_text(i);
      i = skip_to(s, i + 2, ">");
      text_start = i;
      continue;
    }
    const bool closing = i + 1 < s.size() && s[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    if (j >= s.size() || !std::isalpha(static_cast<unsigned char>(s[j]))) {
      ++i;  // literal '<'
      continue;
    }
    flush_text(i);
    const std::size_t name_start = j;
    while (j < s.size() && is_name_char(s[j])) ++j;
    std::string tag = ascii_lower(s.substr(name_start, j - name_start));

    std::vector<std::pair<std::string, std::string>> attrs;
    bool self_closing = false;
    while (j < s.size() && s[j] != '>') {
      if (is_ws(s[j])) {
        ++j;
        continue;
      }
      if (s[j] == '/') {
        self_closing = j + 1 < s.size() && s[j + 1] == '>';
        ++j;
        continue;
      }
      const std::size_t an = j;
      while (j < s.size() && !is_ws(s[j]) && s[j] != '=' && s[j] != '>' && s[j] != '/') ++j;
      std::string name = ascii_lower(s.substr(an, j - an));
      while (j < s.size() && is_ws(s[j])) ++j;
      std::string value;
      if (j < s.size() && s[j] == '=') {
        ++j;
        while (j < s.size() && is_ws(s[j])) ++j;
        if (j < s.size() && (s[j] == '"' || s[j] == '\'')) {
          const char q = s[j++];
          const std::size_t vs = j;
          while (j < s.size() && s[j] != q) ++j;
          value = decode_entities(s.substr(vs, j - vs));
          if (j < s.size()) ++j;
        } else {
          const std::size_t vs = j;
          while (j < s.size() && !is_ws(s[j]) && s[j] != '>') ++j;
          value = decode_entities(s.substr(vs, j - vs));
        }
      }
      if (!name.empty()) attrs.emplace_back(std::move(name), std::move(value));
    }
    i = j < s.size() ? j + 1 : j;
    text_start = i;

    if (closing) {
      builder.end(tag);
      continue;
    }
    builder.start(tag, std::move(attrs), self_closing);
    if (kRawText.contains(tag) && !self_closing) {
      // Raw text runs to the matching end tag; markup inside is not parsed.
      std::size_t k = i;
      while (k < s.size()) {
        k = s.find("</", k);
        if (k == std::string_view::npos) {
          k = s.size();
          break;
        }
        if (iequals_prefix(s, k + 2, tag)) break;
        k += 2;
      }
      builder.text(tag == "script" || tag == "style" ? std::string(s.substr(i, k - i))
                                                      : decode_entities(s.substr(i, k - i)));
      builder.end(tag);
      i = k < s.size() ? skip_to(s, k, ">") : k;
      text_start = i;
    }
  }
  flush_text(s.size());
  return builder.finish();
}

std::string raw_text(const Node& node) {
  if (node.is_text()) return node.text;
  if (node.tag == "br") return " ";
  std::string out;
  for (const auto& c : node.children) out += raw_text(c);
  return out;
}

std::string text_content(const Node& node) { return text::collapse_whitespace(raw_text(node)); }

namespace {

void escape_into(std::string& out, std::string_view s, bool attr) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attr) {
          out += "&quot;";
          break;
        }
        [[fallthrough]];
      default: out.push_back(c);
    }
  }
}

void html_into(std::string& out, const Node& node) {
  if (node.is_text()) {
    escape_into(out, node.text, false);
    return;
  }
  out += '<';
  out += node.tag;
  for (const auto& [k, v] : node.attributes) {
    out += ' ';
    out += k;
    out += "=\"";
    escape_into(out, v, true);
    out += '"';
  }
  out += '>';
  if (kVoid.contains(node.tag)) return;
  for (const auto& c : node.children) html_into(out, c);
  out += "</";
  out += node.tag;
  out += '>';
}

}  // namespace

std::string to_html(const Node& node) {
  std::string out;
  html_into(out, node);
  return out;
}

}  // namespace topseg::extract
