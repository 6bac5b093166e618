// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace rowcol {

constexpr size_t words_for_bits(uint64_t nbits) { return (nbits + 63) / 64; }

/// Fixed-length bit vector packed into 64-bit words, bit i at word i/64, bit i%64.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(uint32_t n) : n_(n), words_(words_for_bits(n), 0) {}

    /// Parse "1011" style strings; index 0 is the leftmost character.
    static BitVec parse(std::string_view bits) {
        BitVec v(static_cast<uint32_t>(bits.size()));
        for (uint32_t i = 0; i < bits.size(); ++i) {
            if (bits[i] == '1') {
                v.set(i);
            } else if (bits[i] != '0') {
                throw std::invalid_argument("BitVec::parse: expected only '0'/'1'");
            }
        }
        return v;
    }

    uint32_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(uint32_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(uint32_t i, bool value = true) {
        const uint64_t mask = uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }

    uint32_t count() const {
        uint32_t c = 0;
        for (uint64_t w : words_) c += static_cast<uint32_t>(std::popcount(w));
        return c;
    }

    bool any() const {
        for (uint64_t w : words_) {
            if (w != 0) return true;
        }
        return false;
    }

    void clear() { words_.assign(words_.size(), 0); }

    std::span<const uint64_t> words() const { return words_; }
    std::span<uint64_t> words() { return words_; }

    /// Indices of set bits in increasing order.
    std::vector<uint32_t> set_bits() const {
        std::vector<uint32_t> out;
        out.reserve(count());
        for (size_t w = 0; w < words_.size(); ++w) {
            uint64_t bits = words_[w];
            while (bits != 0) {
                out.push_back(static_cast<uint32_t>(w * 64 + std::countr_zero(bits)));
                bits &= bits - 1;
            }
        }
        return out;
    }

    friend bool operator==(const BitVec&, const BitVec&) = default;

private:
    uint32_t n_ = 0;
    std::vector<uint64_t> words_;
};

/// Read up to 64 bits starting at bit position `pos` from a packed word array.
/// `len` must be in [1, 64] and the range must lie within `nwords` words.
inline uint64_t extract_bits(std::span<const uint64_t> words, uint64_t pos, uint32_t len) {
    const size_t w = pos >> 6;
    const uint32_t off = static_cast<uint32_t>(pos & 63);
    uint64_t out = words[w] >> off;
    if (off != 0 && off + len > 64) {
        out |= words[w + 1] << (64 - off);
    }
    if (len < 64) {
        out &= (uint64_t{1} << len) - 1;
    }
    return out;
}

/// OR `len` bits starting at `pos` in `src` into `dst` starting at dst bit 0.
inline void or_extract_bits(std::span<const uint64_t> src, uint64_t pos, uint64_t len,
                            std::span<uint64_t> dst) {
    uint64_t done = 0;
    while (done < len) {
        const uint32_t take = static_cast<uint32_t>(std::min<uint64_t>(64, len - done));
        dst[done >> 6] |= extract_bits(src, pos + done, take);
        done += take;
    }
}

inline bool any_bits_in_range(std::span<const uint64_t> src, uint64_t pos, uint64_t len) {
    uint64_t done = 0;
    while (done < len) {
        const uint32_t take = static_cast<uint32_t>(std::min<uint64_t>(64, len - done));
        if (extract_bits(src, pos + done, take) != 0) return true;
        done += take;
    }
    return false;
}

}  // namespace rowcol
