#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace degchemo {

inline constexpr std::uint64_t fnv_offset = 14695981039346656037ull;

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = fnv_offset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = fnv_offset) {
    return fnv1a(s.data(), s.size(), h);
}

}  // namespace degchemo
