// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/estimators.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "rowcol/model.hpp"
#include "rowcol/rng.hpp"

using namespace rowcol;

namespace {

FrameBatch make_batch(uint32_t rows, uint32_t cols, const std::vector<uint64_t>& patterns) {
    FrameBatch batch(rows, cols, patterns.size(), true);
    for (uint64_t t = 0; t < patterns.size(); ++t) {
        batch.truth_bits(t)[0] = patterns[t];
        readout_from_bits(batch.truth_bits(t), rows, cols, batch.row_mask(t),
                          batch.col_mask(t));
    }
    return batch;
}

// Independent 2x2 multiphoton reference, written directly from the event
// bookkeeping: tally M0..M9, estimate event probabilities from the
// single-photon estimate, and redistribute the ambiguous mass.
std::array<double, 4> multiphoton_2x2_reference(const FrameBatch& batch, uint32_t k_max) {
    uint64_t m[10] = {0};
    for (uint64_t f = 0; f < batch.size(); ++f) {
        const uint64_t r = batch.row_mask(f)[0];
        const uint64_t c = batch.col_mask(f)[0];
        uint32_t id = 9;
        if (r == 0) id = 0;
        else if (r == 1 && c == 1) id = 1;
        else if (r == 1 && c == 2) id = 2;
        else if (r == 2 && c == 1) id = 3;
        else if (r == 2 && c == 2) id = 4;
        else if (r == 1 && c == 3) id = 5;
        else if (r == 3 && c == 1) id = 6;
        else if (r == 3 && c == 2) id = 7;
        else if (r == 2 && c == 3) id = 8;
        ++m[id];
    }

    std::array<double, 4> qs{};
    const std::array<uint64_t, 4> singles{m[1], m[2], m[3], m[4]};
    for (int p = 0; p < 4; ++p) {
        const uint64_t denom = singles[p] + m[0];
        qs[p] = denom ? static_cast<double>(singles[p]) / denom : 0.0;
    }

    // Ambiguous events E9..E15 as pixel subsets of {q11,q12,q21,q22}; the
    // first two are the 2-photon diagonals, then the 3-photon triples, then
    // all four.
    const std::array<std::array<int, 4>, 7> events{{{1, 0, 0, 1},
                                                    {0, 1, 1, 0},
                                                    {1, 1, 0, 1},
                                                    {1, 1, 1, 0},
                                                    {1, 0, 1, 1},
                                                    {0, 1, 1, 1},
                                                    {1, 1, 1, 1}}};
    std::array<double, 7> g{};
    std::array<bool, 7> modeled{};
    int modeled_count = 0;
    double total = 0.0;
    for (int e = 0; e < 7; ++e) {
        int photons = 0;
        for (int p = 0; p < 4; ++p) photons += events[e][p];
        modeled[e] = static_cast<uint32_t>(photons) <= k_max;
        if (!modeled[e]) continue;
        ++modeled_count;
        double prob = 1.0;
        for (int p = 0; p < 4; ++p) {
            prob *= events[e][p] ? qs[p] : 1.0 - qs[p];
        }
        g[e] = prob;
        total += prob;
    }
    for (int e = 0; e < 7; ++e) {
        if (!modeled[e]) {
            g[e] = 0.0;
        } else if (total > 1e-300) {
            g[e] /= total;
        } else {
            g[e] = 1.0 / modeled_count;  // uniform fallback
        }
    }

    const std::array<std::array<uint64_t, 3>, 4> unamb{{{m[1], m[5], m[6]},
                                                        {m[2], m[5], m[7]},
                                                        {m[3], m[6], m[8]},
                                                        {m[4], m[7], m[8]}}};
    std::array<double, 4> q{};
    for (int p = 0; p < 4; ++p) {
        double g_sum = 0.0;
        for (int e = 0; e < 7; ++e) {
            if (events[e][p]) g_sum += g[e];
        }
        q[p] = (static_cast<double>(unamb[p][0] + unamb[p][1] + unamb[p][2]) +
                static_cast<double>(m[9]) * g_sum) /
               static_cast<double>(batch.size());
    }
    return q;
}

}  // namespace

TEST_CASE("naive estimator hand examples") {
    const FrameBatch one = make_batch(2, 2, {0b1001});
    const ProbEstimate e1 = estimate_naive(one);
    for (double v : e1.q_hat.values().values()) CHECK(v == 1.0);

    const FrameBatch two = make_batch(2, 2, {0, 0b0001});
    const ProbEstimate e2 = estimate_naive(two);
    CHECK(e2.q_hat(0, 0) == 0.5);
    CHECK(e2.q_hat(0, 1) == 0.0);
    CHECK(e2.q_hat(1, 0) == 0.0);
    CHECK(e2.q_hat(1, 1) == 0.0);

    // Mean naive estimate at uniform q = 0.5 approaches q' = 0.625.
    const FluxImage flux(Matrix<double>(2, 2, std::log(2.0)));
    const FrameBatch big = simulate_batch(flux, 100000, 17);
    const ProbEstimate e3 = estimate_naive(big);
    for (double v : e3.q_hat.values().values()) {
        CHECK(v == doctest::Approx(0.625).epsilon(0.01));
    }

    // Tally-based reformulation is exact.
    const ProbEstimate e4 = estimate_naive(tally_frames(big));
    CHECK(e4.q_hat == e3.q_hat);
}

TEST_CASE("single-photon estimator hand examples") {
    const FrameBatch batch = make_batch(2, 2, {0, 0b0010, 0b1001});
    const ProbEstimate est = estimate_single_photon(batch);
    CHECK(est.q_hat(0, 1) == 0.5);
    CHECK(est.q_hat(0, 0) == 0.0);
    CHECK(est.q_hat(1, 0) == 0.0);
    CHECK(est.q_hat(1, 1) == 0.0);

    // N_ij + N_0 = 0 yields zero, not a division error.
    const FrameBatch no_empty = make_batch(2, 2, {0b1001, 0b0110});
    const ProbEstimate none = estimate_single_photon(no_empty);
    for (double v : none.q_hat.values().values()) CHECK(v == 0.0);
}

TEST_CASE("randomized estimator") {
    // Without ambiguity it equals the oracle on the determined patterns.
    const FrameBatch clean = make_batch(2, 2, {0, 0b0001, 0b0011, 0b0101});
    const ProbEstimate rand_est = estimate_randomized(clean, 123);
    const ProbEstimate oracle = estimate_full_readout(clean);
    CHECK(rand_est.q_hat == oracle.q_hat);

    // One ambiguous frame imputes one of the seven candidate patterns.
    const FrameBatch amb = make_batch(2, 2, {0b1001});
    const ProbEstimate r1 = estimate_randomized(amb, 7);
    uint32_t ones = 0;
    bool row_cover[2] = {false, false}, col_cover[2] = {false, false};
    for (uint32_t i = 0; i < 2; ++i) {
        for (uint32_t j = 0; j < 2; ++j) {
            if (r1.q_hat(i, j) == 1.0) {
                ++ones;
                row_cover[i] = col_cover[j] = true;
            } else {
                CHECK(r1.q_hat(i, j) == 0.0);
            }
        }
    }
    CHECK(ones >= 2);
    CHECK(ones <= 4);
    CHECK(row_cover[0]);
    CHECK(row_cover[1]);
    CHECK(col_cover[0]);
    CHECK(col_cover[1]);

    // Deterministic per seed; different draws across frames are possible.
    const FluxImage flux(Matrix<double>(3, 3, 0.8));
    const FrameBatch big = simulate_batch(flux, 3000, 5);
    const ProbEstimate a = estimate_randomized(big, 99);
    const ProbEstimate b = estimate_randomized(big, 99);
    CHECK(a.q_hat == b.q_hat);
}

TEST_CASE("randomized pick is uniform over the 2x2 candidates") {
    // 10000 copies of the ambiguous frame: each of the 7 patterns should be
    // picked about 1/7 of the time.
    const std::vector<uint64_t> frames(10000, 0b1001);
    const FrameBatch batch = make_batch(2, 2, frames);
    // Count imputed photons at pixel (0,0): it appears in 5 of 7 patterns.
    const ProbEstimate est = estimate_randomized(batch, 2026);
    CHECK(est.q_hat(0, 0) == doctest::Approx(5.0 / 7).epsilon(0.02));
    // Mean photons per pattern: (2+2+3+3+3+3+4)/7 = 20/7.
    double total = 0.0;
    for (double v : est.q_hat.values().values()) total += v;
    CHECK(total == doctest::Approx(20.0 / 7).epsilon(0.02));
}

TEST_CASE("unambiguous estimator hand examples") {
    const FrameBatch batch = make_batch(2, 2, {0, 0b0011});
    const ProbEstimate est = estimate_unambiguous(batch);
    CHECK(est.q_hat(0, 0) == 0.5);
    CHECK(est.q_hat(0, 1) == 0.5);
    CHECK(est.q_hat(1, 0) == 0.0);
    CHECK(est.q_hat(1, 1) == 0.0);

    const FrameBatch all_amb = make_batch(2, 2, {0b1001, 0b0110, 0b1111});
    const ProbEstimate none = estimate_unambiguous(all_amb);
    for (double v : none.q_hat.values().values()) CHECK(v == 0.0);
    CHECK(none.frames_used == 0);
}

TEST_CASE("full-readout oracle") {
    const FrameBatch zeros = make_batch(2, 2, {0, 0});
    const ProbEstimate all_zero = estimate_full_readout(zeros);
    for (double v : all_zero.q_hat.values().values()) {
        CHECK(v == 0.0);
    }

    const FrameBatch two = make_batch(2, 2, {0b0001, 0b1001});
    const ProbEstimate est = estimate_full_readout(two);
    CHECK(est.q_hat(0, 0) == 1.0);
    CHECK(est.q_hat(1, 1) == 0.5);
    CHECK(est.q_hat(0, 1) == 0.0);

    const FluxImage flux(Matrix<double>(2, 2, std::log(2.0)));
    const FrameBatch big = simulate_batch(flux, 100000, 21, true);
    const ProbEstimate freq = estimate_full_readout(big);
    for (double v : freq.q_hat.values().values()) {
        CHECK(v == doctest::Approx(0.5).epsilon(0.01));
    }

    FrameBatch no_truth = simulate_batch(flux, 10, 3, false);
    CHECK_THROWS(estimate_full_readout(no_truth));
}

TEST_CASE("multiphoton estimator hand example") {
    const FrameBatch batch = make_batch(2, 2, {0b0001, 0b1000, 0b1001});
    const ProbEstimate est = estimate_multiphoton(batch, 2);
    CHECK(est.q_hat(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-13));
    CHECK(est.q_hat(1, 1) == doctest::Approx(2.0 / 3).epsilon(1e-13));
    CHECK(est.q_hat(0, 1) == 0.0);
    CHECK(est.q_hat(1, 0) == 0.0);

    // Without ambiguous frames the output is the determined-pattern frequency.
    const FrameBatch clean = make_batch(2, 2, {0, 0b0011, 0b0001});
    const ProbEstimate me = estimate_multiphoton(clean, 4);
    CHECK(me.q_hat(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-13));
    CHECK(me.q_hat(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-13));
    CHECK(me.q_hat(1, 0) == 0.0);
}

TEST_CASE("multiphoton matches the 2x2 closed form on random batches") {
    for (uint64_t trial = 0; trial < 60; ++trial) {
        Matrix<double> flux(2, 2);
        for (uint32_t p = 0; p < 4; ++p) {
            const rng::Block b = rng::frame_block(3, trial, p, 808);
            flux.values()[p] = 2.2 * rng::uniform52(b.x[0], b.x[1]);
        }
        const FrameBatch batch = simulate_batch(FluxImage(flux), 400, 9000 + trial);
        for (uint32_t k : {2u, 3u, 4u}) {
            const ProbEstimate est = estimate_multiphoton(batch, k);
            const std::array<double, 4> ref = multiphoton_2x2_reference(batch, k);
            for (uint32_t p = 0; p < 4; ++p) {
                CHECK(est.q_hat.values().values()[p] ==
                      doctest::Approx(ref[p]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("over-budget readouts impute their minimum photon count") {
    // Five fired rows and columns cannot be explained by four photons; the
    // estimator falls back to the 5-photon candidates instead of dropping.
    FrameBatch batch(5, 5, 1, true);
    for (uint32_t p = 0; p < 25; p += 6) batch.truth_bits(0)[0] |= uint64_t{1} << p;
    readout_from_bits(batch.truth_bits(0), 5, 5, batch.row_mask(0), batch.col_mask(0));
    const ProbEstimate est = estimate_multiphoton(batch, 4);
    CHECK(est.frames_discarded == 0);
    CHECK(est.frames_used == 1);
    // All 5! permutation candidates are weighted uniformly (the preliminary
    // estimate is all-zero), so every fired cell gets mass 1/5.
    double total = 0.0;
    for (double v : est.q_hat.values().values()) total += v;
    CHECK(total == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(est.q_hat(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("multiphoton discards frames beyond the photon cap") {
    // A nine-way diagonal exceeds kMaxImputedPhotons.
    FrameBatch batch(9, 9, 2, true);
    for (uint32_t k = 0; k < 9; ++k) batch.truth_bits(0)[0] |= uint64_t{1} << (k * 10);
    readout_from_bits(batch.truth_bits(0), 9, 9, batch.row_mask(0), batch.col_mask(0));
    batch.truth_bits(1)[0] = 1;  // plus one single frame
    readout_from_bits(batch.truth_bits(1), 9, 9, batch.row_mask(1), batch.col_mask(1));
    const ProbEstimate est = estimate_multiphoton(batch, 4);
    CHECK(est.frames_discarded == 1);
    CHECK(est.frames_used == 1);
    CHECK(est.q_hat(0, 0) == 1.0);
}

TEST_CASE("naive dominates multiphoton imputed mass per pixel") {
    const FluxImage flux(Matrix<double>::from_values(3, 3,
        {0.8, 0.2, 0.5, 0.1, 0.9, 0.3, 0.6, 0.4, 0.7}));
    const FrameBatch batch = simulate_batch(flux, 5000, 71);
    const ProbEstimate naive = estimate_naive(batch);
    for (uint32_t k : {2u, 3u, 4u}) {
        const ProbEstimate me = estimate_multiphoton(batch, k);
        // Compare imputed mass: the multiphoton normalization excludes
        // discarded frames, so scale back to the full batch.
        const double used = static_cast<double>(me.frames_used) /
                            static_cast<double>(batch.size());
        for (size_t p = 0; p < 9; ++p) {
            CHECK(naive.q_hat.values().values()[p] >=
                  me.q_hat.values().values()[p] * used - 1e-12);
        }
    }
}

TEST_CASE("estimator determinism and dispatch") {
    const FluxImage flux(Matrix<double>(2, 2, 0.7));
    const FrameBatch batch = simulate_batch(flux, 2000, 55, true);
    for (const char* name : {"naive", "spe", "random", "unambiguous", "oracle",
                             "me2", "me3", "me4"}) {
        const EstimatorSpec spec = parse_estimator(name);
        const ProbEstimate a = run_estimator(spec, batch, 11);
        const ProbEstimate b = run_estimator(spec, batch, 11);
        CHECK(a.q_hat == b.q_hat);
        CHECK(a.estimator_id == name);
    }
    CHECK_THROWS(parse_estimator("me9x"));
    CHECK_THROWS(parse_estimator("me1"));
    CHECK_THROWS(parse_estimator("bogus"));
}

TEST_CASE("1x1 array: every estimator coincides with the oracle") {
    const FluxImage flux(Matrix<double>(1, 1, 0.9));
    const FrameBatch batch = simulate_batch(flux, 4000, 13, true);
    const ProbEstimate oracle = estimate_full_readout(batch);
    CHECK(estimate_naive(batch).q_hat == oracle.q_hat);
    CHECK(estimate_single_photon(batch).q_hat == oracle.q_hat);
    CHECK(estimate_randomized(batch, 1).q_hat == oracle.q_hat);
    CHECK(estimate_unambiguous(batch).q_hat == oracle.q_hat);
    CHECK(estimate_multiphoton(batch, 4).q_hat == oracle.q_hat);
}
