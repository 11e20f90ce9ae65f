#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace motifbench {

using Md5Digest = std::array<std::uint8_t, 16>;

// RFC 1321 message digest.
Md5Digest md5(std::span<const std::uint8_t> bytes);
Md5Digest md5(std::string_view text);

std::string to_hex(const Md5Digest& digest);

}  // namespace motifbench
