#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace qana {

/// Lowercase hex SHA-256 digest of `data`.
std::string sha256_hex(std::string_view data);

/// Digest of a tuple of fields. Each field is length-prefixed, so
/// ("ab", "c") and ("a", "bc") hash differently.
std::string fields_digest(std::initializer_list<std::string_view> fields);

/// First 8 bytes of the SHA-256 of `data`, big-endian.
std::uint64_t hash64(std::string_view data);

/// SplitMix64 step; a small deterministic generator for mock data.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace qana
