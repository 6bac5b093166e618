// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rowcol::kernels {

// Data-parallel inner loops, provided as a scalar reference implementation and
// an AVX2 variant selected at runtime. Both paths are bit-exact by design:
// only integer arithmetic, exact power-of-two float scaling, and comparisons
// appear in the hot loops, and sums use a fixed 4-way accumulation order. The
// equivalence tests assert exact equality, not tolerances.

struct Ops {
    const char* name;

    /// Write one frame of incidence bits for n pixels into out (ceil(n/64)
    /// words, zeroed first). thresholds must come from prepare_thresholds of
    /// the same Ops: pixel p fires iff its 52-bit uniform draw < q[p] * 2^52.
    void (*sample_frame_bits)(const double* thresholds, uint32_t n, uint64_t seed,
                              uint64_t frame, uint64_t* out);

    /// Lay out per-pixel comparison thresholds (q[p] * 2^52) in the order
    /// sample_frame_bits consumes them. out must hold n doubles.
    void (*prepare_thresholds)(const double* q, uint32_t n, double* out);

    /// Sum of squared differences with fixed 4-lane accumulation order.
    double (*sum_sq_diff)(const double* a, const double* b, size_t n);
};

const Ops& scalar_ops();
bool avx2_supported();
const Ops* avx2_ops();  // nullptr when unsupported or not built

/// Implementation chosen at startup; ROWCOL_SIMD=scalar|avx2|auto overrides.
const Ops& active_ops();

/// Samples incidence frames for a fixed detection-probability map and seed.
/// Thread-safe: sample() only reads shared state.
class FrameSampler {
public:
    FrameSampler(std::span<const double> q, uint64_t seed, const Ops& ops = active_ops());

    void sample(uint64_t frame, std::span<uint64_t> out_words) const;

    uint32_t pixel_count() const { return n_; }
    const char* impl_name() const { return ops_->name; }

private:
    const Ops* ops_;
    std::vector<double> thresholds_;
    uint64_t seed_;
    uint32_t n_;
};

double sum_sq_diff(std::span<const double> a, std::span<const double> b);

}  // namespace rowcol::kernels
