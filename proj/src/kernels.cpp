// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace rowcol::kernels {

bool avx2_supported() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

const Ops& select_ops() {
    const char* env = std::getenv("ROWCOL_SIMD");
    std::string_view mode = env ? env : "auto";
    if (mode == "scalar") return scalar_ops();
    if (mode == "avx2") {
        if (const Ops* ops = avx2_ops(); ops != nullptr && avx2_supported()) return *ops;
        throw std::runtime_error("ROWCOL_SIMD=avx2 requested but AVX2 is unavailable");
    }
    if (const Ops* ops = avx2_ops(); ops != nullptr && avx2_supported()) return *ops;
    return scalar_ops();
}

}  // namespace

const Ops& active_ops() {
    static const Ops& ops = select_ops();
    return ops;
}

FrameSampler::FrameSampler(std::span<const double> q, uint64_t seed, const Ops& ops)
    : ops_(&ops), thresholds_(q.size()), seed_(seed), n_(static_cast<uint32_t>(q.size())) {
    ops_->prepare_thresholds(q.data(), n_, thresholds_.data());
}

void FrameSampler::sample(uint64_t frame, std::span<uint64_t> out_words) const {
    ops_->sample_frame_bits(thresholds_.data(), n_, seed_, frame, out_words.data());
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("sum_sq_diff: size mismatch");
    return active_ops().sum_sq_diff(a.data(), b.data(), a.size());
}

}  // namespace rowcol::kernels
