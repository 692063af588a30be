#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace exnet::util {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

// 64-bit seed mixing (splitmix64 finalizer). Used to derive independent
// generator streams from a base seed.
std::uint64_t mix_seed(std::uint64_t x);

// Stable 64-bit FNV-1a hash of a string; unlike std::hash it is fixed
// across platforms and library versions.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace exnet::util
