#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace topseg::extract {

/// Element or text node of a parsed page. Tag names are lowercase.
struct Node {
  enum class Kind { element, text };

  Kind kind = Kind::element;
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;
  std::vector<Node> children;

  static Node element(std::string tag) { return Node{Kind::element, std::move(tag), {}, {}, {}}; }
  static Node make_text(std::string text) { return Node{Kind::text, {}, {}, std::move(text), {}}; }

  bool is_text() const { return kind == Kind::text; }
  bool is_element(std::string_view name) const { return kind == Kind::element && tag == name; }
  std::optional<std::string_view> attribute(std::string_view name) const;

  friend bool operator==(const Node&, const Node&) = default;
};

/// A page after cleanup. The root is a "body" element whose subtree holds only
/// block containers, text blocks, and inline content inside text blocks.
struct TagTree {
  Node root = Node::element("body");

  friend bool operator==(const TagTree&, const TagTree&) = default;
};

/// Lenient HTML parse. Never fails; unmatched end tags are ignored and
/// unclosed elements end at end of input. Input must already be UTF-8.
Node parse_html(std::string_view html);

/// Converts raw page bytes to UTF-8, honouring a declared windows-1252 or
/// ISO-8859-1 charset, replacing invalid sequences otherwise.
std::string decode_page(std::string_view raw);

std::string decode_entities(std::string_view s);

bool is_inline_tag(std::string_view tag);
bool is_text_block_tag(std::string_view tag);
bool is_heading_tag(std::string_view tag);

/// Concatenated text of a subtree, <br> as a space, whitespace untouched.
std::string raw_text(const Node& node);

/// Whitespace-collapsed text of a subtree.
std::string text_content(const Node& node);

/// Serializes a tree back to HTML (used for debugging and golden tests).
std::string to_html(const Node& node);

}  // namespace topseg::extract
