#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace csplift::detail {

inline std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

// Thin views over a span of 64-bit words; the solver keeps all variable
// domains in one flat buffer so a search node can be saved with one copy.
struct BitsView {
    std::uint64_t* w;
    std::size_t nwords;

    bool test(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { w[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    void clear() {
        for (std::size_t k = 0; k < nwords; ++k) w[k] = 0;
    }
    std::size_t count() const {
        std::size_t c = 0;
        for (std::size_t k = 0; k < nwords; ++k) c += std::popcount(w[k]);
        return c;
    }
    // Returns npos-like value `limit` when no further bit is set.
    std::size_t next(std::size_t from, std::size_t limit) const {
        if (from >= limit) return limit;
        std::size_t k = from >> 6;
        std::uint64_t cur = w[k] & (~std::uint64_t{0} << (from & 63));
        while (true) {
            if (cur) {
                std::size_t r = (k << 6) + std::countr_zero(cur);
                return r < limit ? r : limit;
            }
            if (++k >= nwords) return limit;
            cur = w[k];
        }
    }
};

class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t n, bool value = false)
        : size_(n), words_(words_for(n), value ? ~std::uint64_t{0} : 0) {
        trim();
    }
    std::size_t size() const { return size_; }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    std::size_t count() const {
        std::size_t c = 0;
        for (auto x : words_) c += std::popcount(x);
        return c;
    }
    bool any() const {
        for (auto x : words_)
            if (x) return true;
        return false;
    }
    const std::vector<std::uint64_t>& words() const { return words_; }
    std::vector<std::uint64_t>& words() { return words_; }

private:
    void trim() {
        if (size_ % 64 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace csplift::detail
