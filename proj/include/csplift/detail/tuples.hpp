#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "../error.hpp"

namespace csplift {

using Element = std::uint32_t;
using Tuple = std::vector<Element>;

namespace detail {

// base^exp, or nullopt when it does not fit in 64 bits.
inline std::optional<std::uint64_t> checked_pow(std::uint64_t base, std::size_t exp) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (base != 0 && r > std::numeric_limits<std::uint64_t>::max() / base) return std::nullopt;
        r *= base;
    }
    return r;
}

inline std::uint64_t pow_or_throw(std::uint64_t base, std::size_t exp, const char* what) {
    auto r = checked_pow(base, exp);
    if (!r) throw CapacityError(std::string(what) + ": size overflows 64 bits");
    return *r;
}

// Lexicographic rank with the first coordinate most significant.
inline std::uint64_t encode(std::span<const Element> t, std::uint64_t radix) {
    std::uint64_t c = 0;
    for (auto x : t) c = c * radix + x;
    return c;
}

inline void decode(std::uint64_t code, std::uint64_t radix, std::span<Element> out) {
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = static_cast<Element>(code % radix);
        code /= radix;
    }
}

// Odometer over [0,radix)^n in lexicographic order.
inline bool next_tuple(std::span<Element> t, Element radix) {
    for (std::size_t i = t.size(); i-- > 0;) {
        if (++t[i] < radix) return true;
        t[i] = 0;
    }
    return false;
}

// Odometer over a mixed-radix digit vector.
inline bool next_digits(std::span<std::size_t> d, std::span<const std::size_t> radix) {
    for (std::size_t i = d.size(); i-- > 0;) {
        if (++d[i] < radix[i]) return true;
        d[i] = 0;
    }
    return false;
}

} // namespace detail
} // namespace csplift
