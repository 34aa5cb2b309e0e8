#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "json.hpp"

namespace llmscape {

using Json = nlohmann::json;

/// Serializes `value` with sorted object keys, no whitespace, and every
/// floating-point number rendered with exactly six decimals. Two equal
/// documents always produce the same bytes.
std::string canonical_json(const Json& value);

/// 64-bit FNV-1a over `bytes`.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Lower-case, zero-padded 16 digit hex rendering.
std::string hex64(std::uint64_t value);

}  // namespace llmscape
