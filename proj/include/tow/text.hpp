#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tow::text {

bool is_ascii_space(char c);
bool is_ascii_punct(char c);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::string to_upper_ascii(std::string_view s);

// Strips ASCII punctuation plus common UTF-8 punctuation (curly quotes,
// en/em dash, ellipsis, guillemets) from both ends; interior bytes stay.
std::string strip_edge_punctuation(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);
size_t count_words(std::string_view s);
std::string first_n_words(std::string_view s, size_t n);

bool valid_utf8(std::string_view s);

size_t count_occurrences(std::string_view text, std::string_view needle);

// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

uint64_t fnv1a64(std::string_view s);

std::string format_sig4(double v);

}  // namespace tow::text
