// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rowcol/types.hpp"

namespace rowcol {

/// Packed (row_mask ++ col_mask) words of one readout; keys the ambiguous
/// signature counts.
struct SignatureKey {
    std::vector<uint64_t> words;

    friend bool operator==(const SignatureKey&, const SignatureKey&) = default;
};

struct SignatureKeyHash {
    size_t operator()(const SignatureKey& k) const {
        uint64_t h = 0xcbf29ce484222325ull;
        for (uint64_t w : k.words) {
            h ^= w;
            h *= 0x100000001b3ull;
        }
        return static_cast<size_t>(h);
    }
};

/// Single-pass frame counts feeding every tally-based estimator. Merging is
/// associative, so chunked tallies combine to the same result.
struct FrameTallies {
    uint32_t rows = 0;
    uint32_t cols = 0;
    uint64_t total = 0;
    uint64_t n_empty = 0;
    /// Empty plus unambiguous frame count (the denominator frames that are
    /// fully resolved).
    uint64_t unambiguous_total = 0;
    /// N_ij: frames with exactly one fired row and one fired column at (i,j).
    Matrix<uint64_t> single_counts;
    /// U_ij: detections at (i,j) accumulated over unambiguous frames.
    Matrix<uint64_t> unambiguous_hits;
    /// Occurrence count per distinct ambiguous readout.
    std::unordered_map<SignatureKey, uint64_t, SignatureKeyHash> ambiguous;

    FrameTallies() = default;
    FrameTallies(uint32_t rows, uint32_t cols);

    uint64_t ambiguous_total() const;
    void merge(const FrameTallies& other);
};

FrameTallies tally_frames(const FrameBatch& batch);

/// Tally only frames [begin, end) — used for incremental frame-count sweeps.
FrameTallies tally_frames(const FrameBatch& batch, uint64_t begin, uint64_t end);

}  // namespace rowcol
