#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace tow {
using json = nlohmann::json;
}

namespace tow::jsonio {

// Stable single-line serialization (sorted keys, invalid UTF-8 replaced).
std::string dump(const json& j);

std::string read_file(const std::string& path);
std::vector<std::string> read_lines(const std::string& path);

// Writes via a temp file plus rename so concurrent writers never interleave.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace tow::jsonio
