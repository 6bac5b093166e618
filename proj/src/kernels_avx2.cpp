// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

// AVX2 variants of the sampling and reduction kernels. Eight Philox blocks
// (16 pixels) are processed per iteration; the tail reuses the scalar core.
// Compiled with -mavx2 only (no FMA) so the arithmetic matches the scalar
// reference bit for bit.

#include "rowcol/kernels.hpp"

#ifdef ROWCOL_HAVE_AVX2

#include <immintrin.h>

#include <algorithm>

#include "kernels_detail.hpp"

namespace rowcol::kernels {
namespace {

inline __m256i mulhi_epu32(__m256i a, __m256i b) {
    const __m256i even = _mm256_mul_epu32(a, b);
    const __m256i odd =
        _mm256_mul_epu32(_mm256_srli_epi64(a, 32), _mm256_srli_epi64(b, 32));
    return _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0xAA);
}

inline __m256i widen_lo(__m256i v) {
    return _mm256_cvtepu32_epi64(_mm256_castsi256_si128(v));
}

inline __m256i widen_hi(__m256i v) {
    return _mm256_cvtepu32_epi64(_mm256_extracti128_si256(v, 1));
}

// Exact double value of the 52-bit integer (hi << 20) | lo_shifted per lane.
inline __m256d compose_u52(__m256i hi_words, __m256i lo_shifted) {
    const __m256i u = _mm256_or_si256(_mm256_slli_epi64(hi_words, 20), lo_shifted);
    const __m256i bits = _mm256_or_si256(u, _mm256_set1_epi64x(0x4330000000000000LL));
    return _mm256_sub_pd(_mm256_castsi256_pd(bits), _mm256_set1_pd(0x1p52));
}

// spread4[m] places bit i of m at bit 2*i.
constexpr uint16_t kSpread4[16] = {0x00, 0x01, 0x04, 0x05, 0x10, 0x11, 0x14, 0x15,
                                   0x40, 0x41, 0x44, 0x45, 0x50, 0x51, 0x54, 0x55};

// Thresholds for each 16-pixel chunk are stored in SIMD lane order:
// eight even pixels first, then eight odd pixels. The tail keeps natural order.
void prepare_thresholds_avx2(const double* q, uint32_t n, double* out) {
    const uint32_t main = n & ~15u;
    for (uint32_t base = 0; base < main; base += 16) {
        for (uint32_t i = 0; i < 8; ++i) {
            out[base + i] = q[base + 2 * i] * 0x1p52;
            out[base + 8 + i] = q[base + 2 * i + 1] * 0x1p52;
        }
    }
    for (uint32_t i = main; i < n; ++i) out[i] = q[i] * 0x1p52;
}

void sample_frame_bits_avx2(const double* thresholds, uint32_t n, uint64_t seed,
                            uint64_t frame, uint64_t* out) {
    std::fill(out, out + words_for_bits(n), uint64_t{0});

    uint32_t round_k0[rng::kPhiloxRounds];
    uint32_t round_k1[rng::kPhiloxRounds];
    round_k0[0] = static_cast<uint32_t>(seed);
    round_k1[0] = static_cast<uint32_t>(seed >> 32);
    for (int r = 1; r < rng::kPhiloxRounds; ++r) {
        round_k0[r] = round_k0[r - 1] + rng::kPhiloxW0;
        round_k1[r] = round_k1[r - 1] + rng::kPhiloxW1;
    }
    __m256i k0v[rng::kPhiloxRounds];
    __m256i k1v[rng::kPhiloxRounds];
    for (int r = 0; r < rng::kPhiloxRounds; ++r) {
        k0v[r] = _mm256_set1_epi32(static_cast<int>(round_k0[r]));
        k1v[r] = _mm256_set1_epi32(static_cast<int>(round_k1[r]));
    }

    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(rng::kPhiloxM0));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(rng::kPhiloxM1));
    const __m256i iota = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
    const __m256i c1_init = _mm256_set1_epi32(static_cast<int>(static_cast<uint32_t>(frame)));
    const __m256i c2_init =
        _mm256_set1_epi32(static_cast<int>(static_cast<uint32_t>(frame >> 32)));
    const __m256i c3_init = _mm256_set1_epi32(static_cast<int>(rng::kStreamIncidence));

    const uint32_t main = n & ~15u;
    for (uint32_t p = 0; p < main; p += 16) {
        __m256i c0 = _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(p >> 1)), iota);
        __m256i c1 = c1_init, c2 = c2_init, c3 = c3_init;
        for (int r = 0; r < rng::kPhiloxRounds; ++r) {
            const __m256i lo0 = _mm256_mullo_epi32(c0, m0);
            const __m256i hi0 = mulhi_epu32(c0, m0);
            const __m256i lo1 = _mm256_mullo_epi32(c2, m1);
            const __m256i hi1 = mulhi_epu32(c2, m1);
            c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0v[r]);
            c1 = lo1;
            c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1v[r]);
            c3 = lo0;
        }

        const __m256i even_lo12 = _mm256_srli_epi32(c1, 12);
        const __m256i odd_lo12 = _mm256_srli_epi32(c3, 12);
        const __m256d u_ev_lo = compose_u52(widen_lo(c0), widen_lo(even_lo12));
        const __m256d u_ev_hi = compose_u52(widen_hi(c0), widen_hi(even_lo12));
        const __m256d u_od_lo = compose_u52(widen_lo(c2), widen_lo(odd_lo12));
        const __m256d u_od_hi = compose_u52(widen_hi(c2), widen_hi(odd_lo12));

        const double* th = thresholds + p;
        const int m_ev_lo =
            _mm256_movemask_pd(_mm256_cmp_pd(u_ev_lo, _mm256_loadu_pd(th), _CMP_LT_OQ));
        const int m_ev_hi =
            _mm256_movemask_pd(_mm256_cmp_pd(u_ev_hi, _mm256_loadu_pd(th + 4), _CMP_LT_OQ));
        const int m_od_lo =
            _mm256_movemask_pd(_mm256_cmp_pd(u_od_lo, _mm256_loadu_pd(th + 8), _CMP_LT_OQ));
        const int m_od_hi =
            _mm256_movemask_pd(_mm256_cmp_pd(u_od_hi, _mm256_loadu_pd(th + 12), _CMP_LT_OQ));

        const uint64_t mask16 =
            static_cast<uint64_t>(kSpread4[m_ev_lo]) | (static_cast<uint64_t>(kSpread4[m_ev_hi]) << 8) |
            (static_cast<uint64_t>(kSpread4[m_od_lo]) << 1) |
            (static_cast<uint64_t>(kSpread4[m_od_hi]) << 9);
        out[p >> 6] |= mask16 << (p & 63);
    }

    detail::sample_bits_range(thresholds, main, n, seed, frame, out);
}

double sum_sq_diff_avx2(const double* a, const double* b, size_t n) {
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double tail = 0.0;
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        tail += d * d;
    }
    return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + tail;
}

}  // namespace

const Ops* avx2_ops() {
    static const Ops ops{"avx2", sample_frame_bits_avx2, prepare_thresholds_avx2,
                         sum_sq_diff_avx2};
    return &ops;
}

}  // namespace rowcol::kernels

#else

namespace rowcol::kernels {
const Ops* avx2_ops() { return nullptr; }
}  // namespace rowcol::kernels

#endif
