#pragma once

#include <string>

namespace actsql::detail {

// Hex-encoded SHA-256 of the input bytes.
std::string sha256_hex(const std::string& data);

}  // namespace actsql::detail
