#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace editforge {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Stable 16-hex-digit identifier over an ordered list of fields. Fields are
/// length-prefixed before hashing so ("ab", "c") and ("a", "bc") differ.
std::string content_id(std::initializer_list<std::string_view> fields);

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64-bit FNV-1a; used where a fast, portable, non-cryptographic hash of a
/// string is enough (seed derivation, bucket keys).
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace editforge
