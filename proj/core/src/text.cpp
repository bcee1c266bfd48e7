#include "topseg/text.hpp"

namespace topseg::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

bool is_ascii_alnum(char32_t cp) { return in(cp, '0', '9') || in(cp, 'a', 'z') || in(cp, 'A', 'Z'); }

bool is_digit(char32_t cp) { return in(cp, '0', '9'); }

}  // namespace

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    std::size_t len;
    char32_t cp;
    char32_t min;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    std::size_t j = 1;
    for (; j < len && i + j < n; ++j) {
      const auto b = static_cast<unsigned char>(bytes[i + j]);
      if ((b & 0xC0) != 0x80) break;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (j < len || cp < min || cp > 0x10FFFF || in(cp, 0xD800, 0xDFFF)) {
      out.push_back(kReplacement);
      i += j;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

std::string sanitize_utf8(std::string_view bytes) { return encode_utf8(decode_utf8(bytes)); }

std::string cp1252_to_utf8(std::string_view bytes) {
  static constexpr char32_t kHigh[32] = {
      0x20AC, 0xFFFD, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
      0x2039, 0x0152, 0xFFFD, 0x017D, 0xFFFD, 0xFFFD, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022,
      0x2013, 0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0xFFFD, 0x017E, 0x0178};
  std::string out;
  out.reserve(bytes.size());
  for (unsigned char c : bytes) {
    if (c >= 0x80 && c < 0xA0)
      append_utf8(out, kHigh[c - 0x80]);
    else
      append_utf8(out, c);
  }
  return out;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
    case 0x200B: case 0xFEFF:
      return true;
    default:
      return in(cp, 0x2000, 0x200A);
  }
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) return (cp > 0x20 && cp < 0x7F) && !is_ascii_alnum(cp);
  if (is_space(cp)) return false;
  if (in(cp, 0x00A1, 0x00BF)) return cp != 0x00AA && cp != 0x00B5 && cp != 0x00BA && cp != 0x00B2 && cp != 0x00B3 && cp != 0x00B9;
  return cp == 0x00D7 || cp == 0x00F7 || in(cp, 0x2010, 0x2027) || in(cp, 0x2030, 0x205E) ||
         in(cp, 0x20A0, 0x20CF) || in(cp, 0x2190, 0x2BFF) || in(cp, 0x3001, 0x303F) ||
         in(cp, 0xFE30, 0xFE4F) || in(cp, 0xFF01, 0xFF0F) || in(cp, 0xFF1A, 0xFF20) ||
         in(cp, 0xFF3B, 0xFF40) || in(cp, 0xFF5B, 0xFF65) || cp == kReplacement ||
         in(cp, 0x1F000, 0x1FAFF);
}

bool is_word_char(char32_t cp) {
  if (cp < 0x80) return is_ascii_alnum(cp) || cp == '_';
  if (in(cp, 0x80, 0x9F)) return false;
  return !is_space(cp) && !is_punct(cp);
}

char32_t fold_case(char32_t cp) {
  if (in(cp, 'A', 'Z')) return cp + 0x20;
  if (cp < 0x80) return cp;
  if (in(cp, 0x00C0, 0x00DE) && cp != 0x00D7) return cp + 0x20;
  if (in(cp, 0x0100, 0x012F) || in(cp, 0x0132, 0x0137) || in(cp, 0x014A, 0x0177))
    return (cp % 2 == 0) ? cp + 1 : cp;
  if (in(cp, 0x0139, 0x0148) || in(cp, 0x0179, 0x017E)) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp == 0x0178) return 0x00FF;
  if (in(cp, 0x0391, 0x03A9) && cp != 0x03A2) return cp + 0x20;
  if (in(cp, 0x0410, 0x042F)) return cp + 0x20;
  if (in(cp, 0x0400, 0x040F)) return cp + 0x50;
  return cp;
}

std::string to_lower(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : decode_utf8(s)) append_utf8(out, fold_case(cp));
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char32_t cp : decode_utf8(s)) {
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    append_utf8(out, cp);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  const std::u32string cps = decode_utf8(s);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (is_word_char(cp)) {
      append_utf8(current, fold_case(cp));
      continue;
    }
    const bool has_next = i + 1 < cps.size();
    if (!current.empty() && has_next) {
      const char32_t prev = cps[i - 1];
      const char32_t next = cps[i + 1];
      const bool mid_letter = (cp == '\'' || cp == 0x2019 || cp == '.') && is_word_char(prev) && is_word_char(next) &&
                              next != '_' && prev != '_';
      const bool mid_num = cp == ',' && is_digit(prev) && is_digit(next);
      if (mid_letter || mid_num) {
        current.push_back(cp == 0x2019 ? '\'' : static_cast<char>(cp));
        continue;
      }
    }
    flush();
  }
  flush();
  return tokens;
}

}  // namespace topseg::text
