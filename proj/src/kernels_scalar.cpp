// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "kernels_detail.hpp"
#include "rowcol/kernels.hpp"

namespace rowcol::kernels {
namespace {

void prepare_thresholds_scalar(const double* q, uint32_t n, double* out) {
    for (uint32_t i = 0; i < n; ++i) out[i] = q[i] * 0x1p52;
}

void sample_frame_bits_scalar(const double* thresholds, uint32_t n, uint64_t seed,
                              uint64_t frame, uint64_t* out) {
    std::fill(out, out + words_for_bits(n), uint64_t{0});
    detail::sample_bits_range(thresholds, 0, n, seed, frame, out);
}

double sum_sq_diff_scalar(const double* a, const double* b, size_t n) {
    return detail::sum_sq_diff_strided(a, b, n);
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar", sample_frame_bits_scalar, prepare_thresholds_scalar,
                         sum_sq_diff_scalar};
    return ops;
}

}  // namespace rowcol::kernels
