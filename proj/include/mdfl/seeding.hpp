#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace mdfl {

/// SplitMix64 finalizer. Used to derive independent stream seeds from a
/// single experiment seed so that no two consumers share an RNG stream.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_seed(std::initializer_list<std::uint64_t> parts) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC908ULL;
    for (auto p : parts) h = mix64(h ^ mix64(p));
    return h;
}

/// FNV-1a over a tag, so call sites can name their stream ("personal-init").
constexpr std::uint64_t tag(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace mdfl
