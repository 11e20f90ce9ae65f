#pragma once

#include <cstdint>
#include <string>

#include "motifbench/dataset.hpp"

namespace motifbench {

// 64-bit FNV-1a digest of the canonical serialization of a payload.
// Canonical form: a kind tag byte, little-endian u64 counts and lengths,
// IEEE-754 binary64 values as little-endian bit patterns. Provenance is not
// part of it.
std::uint64_t checksum_payload(const Payload& payload);
inline std::uint64_t checksum_dataset(const Dataset& d) {
  return checksum_payload(d.payload());
}

// Number of bytes in the canonical serialization.
std::uint64_t canonical_size(const Payload& payload);

// Lower-case, zero-padded 16-digit hex.
std::string format_digest(std::uint64_t digest);

}  // namespace motifbench
