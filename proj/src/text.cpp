#include "tow/text.hpp"

#include <array>
#include <cstdio>

namespace tow::text {

namespace {

// Multibyte punctuation stripped at word edges alongside ASCII punctuation.
const std::array<std::string_view, 9> kWidePunct = {
    "\xE2\x80\x9C",  // left double quote
    "\xE2\x80\x9D",  // right double quote
    "\xE2\x80\x98",  // left single quote
    "\xE2\x80\x99",  // right single quote
    "\xE2\x80\x93",  // en dash
    "\xE2\x80\x94",  // em dash
    "\xE2\x80\xA6",  // ellipsis
    "\xC2\xAB",      // left guillemet
    "\xC2\xBB",      // right guillemet
};

size_t leading_punct_len(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s[0])) return 1;
  for (const auto& p : kWidePunct) {
    if (s.substr(0, p.size()) == p) return p.size();
  }
  return 0;
}

size_t trailing_punct_len(std::string_view s) {
  if (s.empty()) return 0;
  if (is_ascii_punct(s.back())) return 1;
  for (const auto& p : kWidePunct) {
    if (s.size() >= p.size() && s.substr(s.size() - p.size()) == p) return p.size();
  }
  return 0;
}

}  // namespace

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return (u >= '!' && u <= '/') || (u >= ':' && u <= '@') || (u >= '[' && u <= '`') ||
         (u >= '{' && u <= '~');
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && is_ascii_space(s[b])) ++b;
  while (e > b && is_ascii_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string to_upper_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

std::string strip_edge_punctuation(std::string_view s) {
  while (true) {
    size_t n = leading_punct_len(s);
    if (n == 0) break;
    s.remove_prefix(n);
  }
  while (true) {
    size_t n = trailing_punct_len(s);
    if (n == 0) break;
    s.remove_suffix(n);
  }
  return std::string(s);
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    size_t b = i;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

size_t count_words(std::string_view s) {
  size_t n = 0, i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    if (i >= s.size()) break;
    ++n;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
  }
  return n;
}

std::string first_n_words(std::string_view s, size_t n) {
  std::vector<std::string> words = split_whitespace(s);
  if (words.size() > n) words.resize(n);
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

bool valid_utf8(std::string_view s) {
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    size_t len;
    uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (size_t k = 1; k < len; ++k) {
      unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (len == 2 && cp < 0x80) return false;
    if (len == 3 && cp < 0x800) return false;
    if (len == 4 && cp < 0x10000) return false;
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += len;
  }
  return true;
}

size_t count_occurrences(std::string_view text, std::string_view needle) {
  if (needle.empty()) return 0;
  size_t n = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ascii_space(s[i])) ++i;
    size_t b = i;
    while (i < s.size() && !is_ascii_space(s[i])) ++i;
    if (i > b) {
      if (!out.empty()) out += ' ';
      out.append(s.substr(b, i - b));
    }
  }
  return out;
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 14695981039346656037ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_sig4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace tow::text
