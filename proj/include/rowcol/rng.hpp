// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace rowcol::rng {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel Random
// Numbers: As Easy as 1, 2, 3", SC'11). Every random quantity in this library
// is produced by encrypting a (counter, key) pair, so any draw can be computed
// independently of all others. That is what makes simulation output identical
// regardless of thread count or SIMD width.
//
// Key     = (seed_lo32, seed_hi32).
// Counter = (c0, c1, c2, c3) with c3 holding the stream id:
//
//   stream 0 (incidence sampling)   c0 = pixel_pair index within the frame
//                                   c1 = frame_lo32, c2 = frame_hi32
//                                   One block serves pixels 2*c0 and 2*c0+1:
//                                   lanes (x0,x1) -> even pixel, (x2,x3) -> odd.
//
//   stream 1 (candidate assignment) c0 = draw index within the frame
//                                   c1 = frame_lo32, c2 = frame_hi32
//
//   stream 2 (derived sub-seeds)    c0 = index_lo32, c1 = index_hi32
//                                   c2 = purpose tag (see below)
//
// Changing this layout changes every simulated batch; treat it as part of the
// on-disk reproducibility contract.

inline constexpr uint32_t kStreamIncidence = 0;
inline constexpr uint32_t kStreamAssignment = 1;
inline constexpr uint32_t kStreamDerive = 2;

// Purpose tags for derived sub-seeds.
inline constexpr uint32_t kDeriveTrial = 0;
inline constexpr uint32_t kDeriveSweepPoint = 1;
inline constexpr uint32_t kDeriveEstimator = 2;

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;
inline constexpr int kPhiloxRounds = 10;

struct Block {
    uint32_t x[4];
};

inline Block philox4x32(Block ctr, uint64_t seed) {
    uint32_t k0 = static_cast<uint32_t>(seed);
    uint32_t k1 = static_cast<uint32_t>(seed >> 32);
    for (int round = 0; round < kPhiloxRounds; ++round) {
        if (round != 0) {
            k0 += kPhiloxW0;
            k1 += kPhiloxW1;
        }
        const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * ctr.x[0];
        const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * ctr.x[2];
        ctr = Block{{static_cast<uint32_t>(p1 >> 32) ^ ctr.x[1] ^ k0,
                     static_cast<uint32_t>(p1),
                     static_cast<uint32_t>(p0 >> 32) ^ ctr.x[3] ^ k1,
                     static_cast<uint32_t>(p0)}};
    }
    return ctr;
}

/// 52-bit uniform integer assembled from two 32-bit words.
inline uint64_t bits52(uint32_t hi, uint32_t lo) {
    return (static_cast<uint64_t>(hi) << 20) | (lo >> 12);
}

/// Uniform double in [0, 1) with 52 random bits.
inline double uniform52(uint32_t hi, uint32_t lo) {
    return static_cast<double>(bits52(hi, lo)) * 0x1p-52;
}

inline Block frame_block(uint32_t stream, uint64_t frame, uint32_t index, uint64_t seed) {
    return philox4x32(Block{{index, static_cast<uint32_t>(frame),
                             static_cast<uint32_t>(frame >> 32), stream}},
                      seed);
}

/// Statistically independent 64-bit sub-seed for (purpose, index).
inline uint64_t derive_seed(uint64_t seed, uint32_t purpose, uint64_t index) {
    const Block out = philox4x32(Block{{static_cast<uint32_t>(index),
                                        static_cast<uint32_t>(index >> 32), purpose,
                                        kStreamDerive}},
                                 seed);
    return (static_cast<uint64_t>(out.x[1]) << 32) | out.x[0];
}

/// One uniform draw in [0,1) for (frame, draw index) on the assignment stream.
inline double assignment_uniform(uint64_t seed, uint64_t frame, uint32_t draw) {
    const Block out = frame_block(kStreamAssignment, frame, draw, seed);
    return uniform52(out.x[0], out.x[1]);
}

}  // namespace rowcol::rng
