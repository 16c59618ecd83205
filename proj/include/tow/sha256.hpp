#pragma once

#include <string>
#include <string_view>

namespace tow {

// Lowercase hex digest (64 chars), backed by OpenSSL libcrypto.
std::string sha256_hex(std::string_view data);

}  // namespace tow
