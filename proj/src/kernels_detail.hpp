// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>

#include "rowcol/bitvec.hpp"
#include "rowcol/rng.hpp"

namespace rowcol::kernels::detail {

// Scalar core shared by the reference path and the AVX2 tail handling.
// Thresholds are indexed in natural pixel order over [begin, end).
inline void sample_bits_range(const double* thresholds, uint32_t begin, uint32_t end,
                              uint64_t seed, uint64_t frame, uint64_t* out) {
    const uint32_t frame_lo = static_cast<uint32_t>(frame);
    const uint32_t frame_hi = static_cast<uint32_t>(frame >> 32);
    uint32_t p = begin;
    while (p < end) {
        const rng::Block blk = rng::philox4x32(
            rng::Block{{p >> 1, frame_lo, frame_hi, rng::kStreamIncidence}}, seed);
        if ((p & 1u) == 0) {
            const double u = static_cast<double>(rng::bits52(blk.x[0], blk.x[1]));
            if (u < thresholds[p]) out[p >> 6] |= uint64_t{1} << (p & 63);
            ++p;
            if (p == end) break;
        }
        const double u = static_cast<double>(rng::bits52(blk.x[2], blk.x[3]));
        if (u < thresholds[p]) out[p >> 6] |= uint64_t{1} << (p & 63);
        ++p;
    }
}

// 4-way strided sum of squared differences. Both implementations follow this
// exact accumulation order so their results are bit-identical.
inline double sum_sq_diff_strided(const double* a, const double* b, size_t n) {
    double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        acc0 += d0 * d0;
        acc1 += d1 * d1;
        acc2 += d2 * d2;
        acc3 += d3 * d3;
    }
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return ((acc0 + acc1) + (acc2 + acc3)) + tail;
}

}  // namespace rowcol::kernels::detail
