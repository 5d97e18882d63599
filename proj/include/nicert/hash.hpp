#pragma once

#include <string>

namespace nicert {

// Hex-encoded SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

}  // namespace nicert
