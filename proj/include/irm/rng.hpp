#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace irm {

constexpr std::uint64_t fnv1a(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Independent stream keyed by (run seed, producer key, tick), so the draws
/// a producer sees do not depend on evaluation order.
inline std::mt19937_64 derive_stream(std::uint64_t seed, std::string_view key, std::uint64_t tick)
{
    std::uint64_t s = splitmix64(seed ^ splitmix64(fnv1a(key) ^ splitmix64(tick)));
    return std::mt19937_64(s);
}

} // namespace irm
