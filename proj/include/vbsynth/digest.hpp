#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace vbsynth {

/// SHA-256 as lowercase hex.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

} // namespace vbsynth
