#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace linkpred {

// Minimal SHA-256 (FIPS 180-4). Used for content digests of synthetic pages
// and for config hashes embedded in output files; only equality semantics
// are relied upon.
std::array<std::uint8_t, 32> sha256(std::string_view data);

// Lowercase hex digest.
std::string sha256_hex(std::string_view data);

}  // namespace linkpred
