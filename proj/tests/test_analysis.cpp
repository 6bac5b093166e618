// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/analysis.hpp"

#include <doctest.h>

#include <array>
#include <bit>
#include <cmath>
#include <vector>

#include "rowcol/model.hpp"
#include "rowcol/rng.hpp"

using namespace rowcol;

namespace {

// Event id of a 2x2 incidence pattern (bits: pixel p = bit p, row-major).
// 0 empty, 1..4 singles, 5 top row, 6 left col, 7 right col, 8 bottom row,
// 9 ambiguous.
int event_of(uint32_t bits) {
    switch (bits) {
        case 0b0000: return 0;
        case 0b0001: return 1;
        case 0b0010: return 2;
        case 0b0100: return 3;
        case 0b1000: return 4;
        case 0b0011: return 5;
        case 0b0101: return 6;
        case 0b1010: return 7;
        case 0b1100: return 8;
        default: return 9;
    }
}

std::array<double, 10> event_probs_brute(const DetectionProbMap& q) {
    std::array<double, 10> r{};
    for (uint32_t bits = 0; bits < 16; ++bits) {
        double prob = 1.0;
        for (uint32_t p = 0; p < 4; ++p) {
            const double qp = q.values().values()[p];
            prob *= (bits >> p) & 1 ? qp : 1.0 - qp;
        }
        r[event_of(bits)] += prob;
    }
    return r;
}

DetectionProbMap random_q(uint64_t trial, double lo = 0.0, double hi = 1.0) {
    Matrix<double> m(2, 2);
    for (uint32_t p = 0; p < 4; ++p) {
        const rng::Block b = rng::frame_block(3, trial, p, 4242);
        m.values()[p] = lo + (hi - lo) * rng::uniform52(b.x[0], b.x[1]);
    }
    return DetectionProbMap(m);
}

// Expected per-frame negative log-likelihood of parameters theta under data
// generated at q0, from the ten-event multinomial model.
double expected_nll(const DetectionProbMap& q0, const std::array<double, 4>& theta) {
    const std::array<double, 10> r0 = event_probs_brute(q0);
    Matrix<double> tm(2, 2);
    for (uint32_t p = 0; p < 4; ++p) tm.values()[p] = theta[p];
    const std::array<double, 10> rt = event_probs_brute(DetectionProbMap(tm));
    double nll = 0.0;
    for (int k = 0; k < 10; ++k) {
        nll -= r0[k] * std::log(rt[k]);
    }
    return nll;
}

bool cholesky_ok(Matrix<double> a, double shift) {
    const uint32_t n = a.rows();
    for (uint32_t i = 0; i < n; ++i) a(i, i) += shift;
    for (uint32_t c = 0; c < n; ++c) {
        double d = a(c, c);
        for (uint32_t k = 0; k < c; ++k) d -= a(c, k) * a(c, k);
        if (d < 0.0) return false;
        const double root = std::sqrt(d);
        a(c, c) = root;
        for (uint32_t r = c + 1; r < n; ++r) {
            double v = a(r, c);
            for (uint32_t k = 0; k < c; ++k) v -= a(r, k) * a(c, k);
            a(r, c) = root > 0 ? v / root : 0.0;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("error metrics") {
    const FluxImage truth(Matrix<double>(2, 2, 1.0));
    const auto [mse0, psnr0] = error_metrics(truth, truth);
    CHECK(mse0 == 0.0);
    CHECK(std::isinf(psnr0));

    const FluxImage est(Matrix<double>(2, 2, 1.1));
    const auto [mse, psnr] = error_metrics(est, truth, 1.0);
    CHECK(mse == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(psnr == doctest::Approx(20.0).epsilon(1e-9));

    const FluxImage dark(Matrix<double>(2, 2, 0.0));
    CHECK_THROWS(error_metrics(dark, dark));
    CHECK_THROWS(error_metrics(truth, FluxImage(Matrix<double>(3, 2, 1.0)), 1.0));
}

TEST_CASE("analytic naive bias closed form") {
    Matrix<double> m(2, 2, 0.5);
    const Matrix<double> bias = analytic_naive_bias(DetectionProbMap(m));
    for (double v : bias.values()) CHECK(v == doctest::Approx(0.125).epsilon(1e-14));

    // A saturated pixel cannot be overestimated.
    Matrix<double> sat(2, 2, 0.5);
    sat(0, 0) = 1.0;
    CHECK(analytic_naive_bias(DetectionProbMap(sat))(0, 0) == 0.0);

    // Dark row beside the pixel kills the column factor.
    Matrix<double> darkrow(2, 2, 0.0);
    darkrow(0, 0) = 0.7;
    darkrow(0, 1) = 0.6;
    const Matrix<double> b2 = analytic_naive_bias(DetectionProbMap(darkrow));
    CHECK(b2(0, 0) == 0.0);
}

TEST_CASE("naive bias matches exhaustive enumeration up to 3x3") {
    for (uint32_t n = 2; n <= 3; ++n) {
        Matrix<double> qm(n, n);
        for (uint32_t p = 0; p < n * n; ++p) {
            const rng::Block b = rng::frame_block(3, n, p, 31337);
            qm.values()[p] = rng::uniform52(b.x[0], b.x[1]);
        }
        const DetectionProbMap q(qm);
        const uint32_t npx = n * n;

        // E[R_i C_j] by summing over all incidence patterns.
        Matrix<double> expected(n, n, 0.0);
        for (uint64_t bits = 0; bits < (uint64_t{1} << npx); ++bits) {
            double prob = 1.0;
            for (uint32_t p = 0; p < npx; ++p) {
                prob *= (bits >> p) & 1 ? qm.values()[p] : 1.0 - qm.values()[p];
            }
            IncidenceFrame y(n, n);
            y.words()[0] = bits;
            const ReadoutFrame r = readout_of(y);
            for (uint32_t i : r.row_mask.set_bits()) {
                for (uint32_t j : r.col_mask.set_bits()) expected(i, j) += prob;
            }
        }

        const Matrix<double> bias = analytic_naive_bias(q);
        const Matrix<double> qprime = naive_qprime(q);
        for (uint32_t i = 0; i < n; ++i) {
            for (uint32_t j = 0; j < n; ++j) {
                CHECK(bias(i, j) ==
                      doctest::Approx(expected(i, j) - qm(i, j)).epsilon(1e-12));
                CHECK(qprime(i, j) == doctest::Approx(expected(i, j)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("empirical bias and variance") {
    const FluxImage flux(Matrix<double>(2, 2, std::log(2.0)));

    // Oracle estimator: |bias| within 3 sigma of zero.
    const ErrorReport oracle = empirical_bias_variance(
        {EstimatorKind::FullReadout, 0}, flux, 2000, 200, 101);
    const double sigma_oracle = std::sqrt(0.25 / (2000.0 * 200));
    for (double b : oracle.per_pixel_bias.values()) {
        CHECK(std::abs(b) <= 3.5 * sigma_oracle);
    }

    // Naive estimator: bias close to the analytic 0.125.
    const ErrorReport naive = empirical_bias_variance(
        {EstimatorKind::Naive, 0}, flux, 2000, 300, 102);
    const double sigma_naive = std::sqrt(0.625 * 0.375 / (2000.0 * 300));
    for (double b : naive.per_pixel_bias.values()) {
        CHECK(std::abs(b - 0.125) <= 4.0 * sigma_naive);
    }

    // Single-photon estimator: unbiased within 3 sigma.
    const ErrorReport spe = empirical_bias_variance(
        {EstimatorKind::SinglePhoton, 0}, flux, 2000, 300, 103);
    for (uint32_t p = 0; p < 4; ++p) {
        const double sd = std::sqrt(spe.per_pixel_variance.values()[p] / 300.0);
        CHECK(std::abs(spe.per_pixel_bias.values()[p]) <= 3.5 * sd);
    }

    // Bias-variance identity on the stored draws.
    for (uint32_t p = 0; p < 4; ++p) {
        const double lhs = spe.per_pixel_mse.values()[p];
        const double rhs = spe.per_pixel_bias.values()[p] * spe.per_pixel_bias.values()[p] +
                           spe.per_pixel_variance.values()[p];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }

    CHECK_THROWS(empirical_bias_variance({EstimatorKind::Naive, 0}, flux, 10, 1, 1));
}

TEST_CASE("2x2 event probabilities") {
    const DetectionProbMap dark(Matrix<double>(2, 2, 0.0));
    const auto r_dark = event_probabilities_2x2(dark);
    CHECK(r_dark[0] == 1.0);
    for (int k = 1; k < 10; ++k) CHECK(r_dark[k] == 0.0);

    const auto r_half = event_probabilities_2x2(DetectionProbMap(Matrix<double>(2, 2, 0.5)));
    for (int k = 0; k < 9; ++k) CHECK(r_half[k] == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(r_half[9] == doctest::Approx(0.4375).epsilon(1e-14));

    // Brute-force grouping of the 16 patterns, and the sum-to-one invariant,
    // across 1000 random maps.
    for (uint64_t trial = 0; trial < 1000; ++trial) {
        const DetectionProbMap q = random_q(trial);
        const auto r = event_probabilities_2x2(q);
        const auto brute = event_probs_brute(q);
        double sum = 0.0;
        for (int k = 0; k < 10; ++k) {
            CHECK(r[k] == doctest::Approx(brute[k]).epsilon(1e-12));
            sum += r[k];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    CHECK_THROWS(event_probabilities_2x2(DetectionProbMap(Matrix<double>(3, 3, 0.5))));
}

TEST_CASE("2x2 Fisher information closed form") {
    const DetectionProbMap half(Matrix<double>(2, 2, 0.5));
    const Matrix<double> fim = fim_2x2(half);
    // 0.75 + 1.5 + 0.25 * 0.5625 / 0.4375
    CHECK(fim(0, 0) == doctest::Approx(2.5714285714285716).epsilon(1e-12));
    for (uint32_t i = 0; i < 4; ++i) {
        for (uint32_t j = 0; j < 4; ++j) CHECK(fim(i, j) == fim(j, i));
    }

    // Boundary probabilities carry no invertible information.
    Matrix<double> edge(2, 2, 0.5);
    edge(0, 1) = 1.0;
    CHECK_THROWS(fim_2x2(DetectionProbMap(edge)));
    edge(0, 1) = 0.0;
    CHECK_THROWS(fim_2x2(DetectionProbMap(edge)));

    // Interior limit: I_12 = q21 q22 / denom vanishes as q21 -> 0.
    Matrix<double> lim(2, 2, 0.5);
    lim(1, 0) = 1e-9;
    CHECK(std::abs(fim_2x2(DetectionProbMap(lim))(0, 1)) < 1e-8);
}

TEST_CASE("FIM matches the finite-difference Hessian of the expected NLL") {
    const double h = 1e-4;
    for (uint64_t trial = 0; trial < 20; ++trial) {
        const DetectionProbMap q = random_q(trial, 0.08, 0.92);
        const Matrix<double> fim = fim_2x2(q);
        std::array<double, 4> theta{q(0, 0), q(0, 1), q(1, 0), q(1, 1)};

        for (uint32_t i = 0; i < 4; ++i) {
            for (uint32_t j = i; j < 4; ++j) {
                double fd;
                if (i == j) {
                    auto tp = theta, tm = theta;
                    tp[i] += h;
                    tm[i] -= h;
                    fd = (expected_nll(q, tp) - 2.0 * expected_nll(q, theta) +
                          expected_nll(q, tm)) /
                         (h * h);
                } else {
                    auto tpp = theta, tpm = theta, tmp = theta, tmm = theta;
                    tpp[i] += h; tpp[j] += h;
                    tpm[i] += h; tpm[j] -= h;
                    tmp[i] -= h; tmp[j] += h;
                    tmm[i] -= h; tmm[j] -= h;
                    fd = (expected_nll(q, tpp) - expected_nll(q, tpm) -
                          expected_nll(q, tmp) + expected_nll(q, tmm)) /
                         (4.0 * h * h);
                }
                const double scale = std::max(1.0, std::abs(fim(i, j)));
                CHECK(std::abs(fim(i, j) - fd) / scale <= 1e-5);
            }
        }
    }
}

TEST_CASE("FIM is positive semidefinite at random interior points") {
    for (uint64_t trial = 0; trial < 1000; ++trial) {
        const DetectionProbMap q = random_q(trial, 0.02, 0.98);
        CHECK(cholesky_ok(fim_2x2(q), 1e-9));
    }
}

TEST_CASE("CRB scaling and value") {
    const DetectionProbMap half(Matrix<double>(2, 2, 0.5));
    const double c1 = crb_2x2(half, 1);
    CHECK(crb_2x2(half, 2) == c1 / 2.0);
    CHECK(crb_2x2(half, 1000) == doctest::Approx(c1 / 1000.0).epsilon(1e-15));

    // Independent 4x4 inversion via elimination written here.
    const Matrix<double> fim = fim_2x2(half);
    Matrix<double> a = fim;
    Matrix<double> inv(4, 4, 0.0);
    for (int i = 0; i < 4; ++i) inv(i, i) = 1.0;
    for (uint32_t c = 0; c < 4; ++c) {
        uint32_t piv = c;
        for (uint32_t r = c + 1; r < 4; ++r) {
            if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
        }
        for (uint32_t k = 0; k < 4; ++k) {
            std::swap(a(c, k), a(piv, k));
            std::swap(inv(c, k), inv(piv, k));
        }
        const double d = a(c, c);
        for (uint32_t k = 0; k < 4; ++k) {
            a(c, k) /= d;
            inv(c, k) /= d;
        }
        for (uint32_t r = 0; r < 4; ++r) {
            if (r == c) continue;
            const double f = a(r, c);
            for (uint32_t k = 0; k < 4; ++k) {
                a(r, k) -= f * a(c, k);
                inv(r, k) -= f * inv(c, k);
            }
        }
    }
    double mean_diag = (inv(0, 0) + inv(1, 1) + inv(2, 2) + inv(3, 3)) / 4.0;
    CHECK(c1 == doctest::Approx(mean_diag).epsilon(1e-12));

    // The unambiguous-readout reference 0.25/T lies strictly below.
    CHECK(c1 > 0.25);

    // Near-singular information is rejected.
    Matrix<double> tiny(2, 2, 0.5);
    tiny(0, 0) = 1e-13;
    CHECK_THROWS(crb_2x2(DetectionProbMap(tiny), 1));
}
