// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rowcol/kernels.hpp"
#include "rowcol/model.hpp"
#include "rowcol/parallel.hpp"
#include "rowcol/rng.hpp"

namespace rowcol {

std::pair<double, double> error_metrics(const FluxImage& estimate, const FluxImage& truth,
                                        std::optional<double> peak) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols()) {
        throw std::invalid_argument("error_metrics: dimension mismatch");
    }
    double peak_value;
    if (peak.has_value()) {
        peak_value = *peak;
    } else {
        peak_value = *std::max_element(truth.values().values().begin(),
                                       truth.values().values().end());
    }
    if (!(peak_value > 0.0)) {
        throw std::invalid_argument("error_metrics: peak must be positive");
    }
    const double mse = kernels::sum_sq_diff(estimate.values().values(),
                                            truth.values().values()) /
                       static_cast<double>(truth.values().size());
    const double psnr = mse == 0.0
                            ? std::numeric_limits<double>::infinity()
                            : 10.0 * std::log10(peak_value * peak_value / mse);
    return {mse, psnr};
}

Matrix<double> analytic_naive_bias(const DetectionProbMap& q) {
    const uint32_t rows = q.rows();
    const uint32_t cols = q.cols();
    // Column products prod_k (1-q_kj) and row products prod_l (1-q_il).
    std::vector<double> col_prod(cols, 1.0);
    std::vector<double> row_prod(rows, 1.0);
    for (uint32_t i = 0; i < rows; ++i) {
        for (uint32_t j = 0; j < cols; ++j) {
            const double miss = 1.0 - q(i, j);
            col_prod[j] *= miss;
            row_prod[i] *= miss;
        }
    }
    Matrix<double> bias(rows, cols);
    for (uint32_t i = 0; i < rows; ++i) {
        for (uint32_t j = 0; j < cols; ++j) {
            const double miss = 1.0 - q(i, j);
            // Exclude pixel (i,j) from both products. When q_ij = 1 the
            // shared factor is zero and so is the bias.
            double others_col, others_row;
            if (miss == 0.0) {
                bias(i, j) = 0.0;
                continue;
            }
            others_col = 1.0;
            for (uint32_t k = 0; k < rows; ++k) {
                if (k != i) others_col *= 1.0 - q(k, j);
            }
            others_row = 1.0;
            for (uint32_t l = 0; l < cols; ++l) {
                if (l != j) others_row *= 1.0 - q(i, l);
            }
            bias(i, j) = miss * (1.0 - others_col) * (1.0 - others_row);
        }
    }
    return bias;
}

Matrix<double> naive_qprime(const DetectionProbMap& q) {
    Matrix<double> out = analytic_naive_bias(q);
    for (uint32_t i = 0; i < q.rows(); ++i) {
        for (uint32_t j = 0; j < q.cols(); ++j) {
            out(i, j) += q(i, j);
        }
    }
    return out;
}

ErrorReport empirical_bias_variance(const EstimatorSpec& estimator, const FluxImage& flux,
                                    uint64_t frames, uint32_t trials, RandomSeed seed) {
    if (trials < 2) {
        throw std::invalid_argument("empirical_bias_variance: trials must be >= 2");
    }
    const DetectionProbMap q_true = detection_prob_from_flux(flux);
    const uint32_t rows = flux.rows();
    const uint32_t cols = flux.cols();
    const size_t npx = q_true.values().size();

    std::vector<Matrix<double>> samples(trials);
    std::vector<double> flux_mse(trials, 0.0);
    const bool needs_truth = estimator.kind == EstimatorKind::FullReadout;

    parallel_for(trials, [&](uint64_t begin, uint64_t end) {
        for (uint64_t trial = begin; trial < end; ++trial) {
            const uint64_t batch_seed = rng::derive_seed(seed, rng::kDeriveTrial, trial);
            const FrameBatch batch =
                simulate_batch_q(q_true, frames, batch_seed, needs_truth);
            const ProbEstimate est = run_estimator(
                estimator, batch, rng::derive_seed(batch_seed, rng::kDeriveEstimator, 0));
            const FluxImage lambda_hat = flux_from_detection_prob(est.q_hat);
            flux_mse[trial] = kernels::sum_sq_diff(lambda_hat.values().values(),
                                                   flux.values().values()) /
                              static_cast<double>(npx);
            samples[trial] = est.q_hat.values();
        }
    });

    ErrorReport report;
    report.trials = trials;
    report.per_pixel_bias = Matrix<double>(rows, cols, 0.0);
    report.per_pixel_variance = Matrix<double>(rows, cols, 0.0);
    report.per_pixel_mse = Matrix<double>(rows, cols, 0.0);

    Matrix<double> mean(rows, cols, 0.0);
    for (const auto& s : samples) {
        for (size_t p = 0; p < npx; ++p) mean.values()[p] += s.values()[p];
    }
    const double inv_trials = 1.0 / static_cast<double>(trials);
    for (size_t p = 0; p < npx; ++p) mean.values()[p] *= inv_trials;

    for (const auto& s : samples) {
        for (size_t p = 0; p < npx; ++p) {
            const double dev = s.values()[p] - mean.values()[p];
            const double err = s.values()[p] - q_true.values().values()[p];
            report.per_pixel_variance.values()[p] += dev * dev;
            report.per_pixel_mse.values()[p] += err * err;
        }
    }
    for (size_t p = 0; p < npx; ++p) {
        report.per_pixel_bias.values()[p] =
            mean.values()[p] - q_true.values().values()[p];
        report.per_pixel_variance.values()[p] *= inv_trials;
        report.per_pixel_mse.values()[p] *= inv_trials;
    }

    double mse_sum = 0.0;
    for (double m : flux_mse) mse_sum += m;
    report.mse = mse_sum * inv_trials;

    const double peak = *std::max_element(flux.values().values().begin(),
                                          flux.values().values().end());
    if (report.mse == 0.0) {
        report.psnr = std::numeric_limits<double>::infinity();
    } else if (peak > 0.0) {
        report.psnr = 10.0 * std::log10(peak * peak / report.mse);
    } else {
        report.psnr = std::numeric_limits<double>::quiet_NaN();
    }
    return report;
}

namespace {

void require_2x2(const DetectionProbMap& q, const char* who) {
    if (q.rows() != 2 || q.cols() != 2) {
        throw std::invalid_argument(std::string(who) + ": expected a 2x2 array");
    }
}

}  // namespace

std::array<double, 10> event_probabilities_2x2(const DetectionProbMap& q) {
    require_2x2(q, "event_probabilities_2x2");
    const double q11 = q(0, 0), q12 = q(0, 1), q21 = q(1, 0), q22 = q(1, 1);
    const double m11 = 1.0 - q11, m12 = 1.0 - q12, m21 = 1.0 - q21, m22 = 1.0 - q22;
    std::array<double, 10> r{};
    r[0] = m11 * m12 * m21 * m22;
    r[1] = q11 * m12 * m21 * m22;
    r[2] = q12 * m11 * m21 * m22;
    r[3] = q21 * m11 * m12 * m22;
    r[4] = q22 * m11 * m12 * m21;
    r[5] = q11 * q12 * m21 * m22;  // top row pair
    r[6] = q11 * q21 * m12 * m22;  // left column pair
    r[7] = q12 * q22 * m11 * m21;  // right column pair
    r[8] = q21 * q22 * m11 * m12;  // bottom row pair
    r[9] = q11 * q22 + q12 * q21 - q11 * q12 * q21 * q22;
    return r;
}

Matrix<double> fim_2x2(const DetectionProbMap& q) {
    require_2x2(q, "fim_2x2");
    const std::array<double, 4> p{q(0, 0), q(0, 1), q(1, 0), q(1, 1)};
    for (double v : p) {
        if (!(v > 0.0 && v < 1.0)) {
            throw std::invalid_argument(
                "fim_2x2: information is singular at q in {0, 1}");
        }
    }
    const double denom = p[0] * p[3] + p[1] * p[2] - p[0] * p[1] * p[2] * p[3];

    Matrix<double> fim(4, 4, 0.0);
    for (uint32_t a = 0; a < 4; ++a) {
        const uint32_t comp = 3 - a;
        // Product of the diagonal pair that excludes parameter a.
        const double s = (a == 0 || a == 3) ? p[1] * p[2] : p[0] * p[3];
        const double one_minus_s = 1.0 - s;
        fim(a, a) = (1.0 - p[comp]) * one_minus_s / p[a] + one_minus_s / (1.0 - p[a]) +
                    p[comp] * p[comp] * one_minus_s * one_minus_s / denom;
    }
    for (uint32_t a = 0; a < 4; ++a) {
        for (uint32_t b = a + 1; b < 4; ++b) {
            double value;
            if (b == 3 - a) {
                // Diagonal partners: the cross term of the other pair.
                const double s = (a == 0) ? p[1] * p[2] : p[0] * p[3];
                value = s * (s - 1.0) / denom;
            } else {
                // Same row or column: product of the two remaining pixels.
                double prod = 1.0;
                for (uint32_t c = 0; c < 4; ++c) {
                    if (c != a && c != b) prod *= p[c];
                }
                value = prod / denom;
            }
            fim(a, b) = value;
            fim(b, a) = value;
        }
    }
    return fim;
}

Matrix<double> invert_matrix(const Matrix<double>& m) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("invert_matrix: matrix must be square");
    }
    const uint32_t n = m.rows();
    Matrix<double> a = m;
    Matrix<double> inv(n, n, 0.0);
    for (uint32_t i = 0; i < n; ++i) inv(i, i) = 1.0;

    for (uint32_t col = 0; col < n; ++col) {
        uint32_t pivot = col;
        double best = std::abs(a(col, col));
        for (uint32_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > best) {
                best = std::abs(a(r, col));
                pivot = r;
            }
        }
        if (best == 0.0) throw std::runtime_error("invert_matrix: singular matrix");
        if (pivot != col) {
            for (uint32_t c = 0; c < n; ++c) {
                std::swap(a(col, c), a(pivot, c));
                std::swap(inv(col, c), inv(pivot, c));
            }
        }
        const double inv_pivot = 1.0 / a(col, col);
        for (uint32_t c = 0; c < n; ++c) {
            a(col, c) *= inv_pivot;
            inv(col, c) *= inv_pivot;
        }
        for (uint32_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = a(r, col);
            if (factor == 0.0) continue;
            for (uint32_t c = 0; c < n; ++c) {
                a(r, c) -= factor * a(col, c);
                inv(r, c) -= factor * inv(col, c);
            }
        }
    }
    return inv;
}

namespace {

double norm1(const Matrix<double>& m) {
    double best = 0.0;
    for (uint32_t j = 0; j < m.cols(); ++j) {
        double col = 0.0;
        for (uint32_t i = 0; i < m.rows(); ++i) col += std::abs(m(i, j));
        best = std::max(best, col);
    }
    return best;
}

}  // namespace

double crb_2x2(const DetectionProbMap& q, uint64_t frames) {
    if (frames == 0) throw std::invalid_argument("crb_2x2: frames must be >= 1");
    const Matrix<double> fim = fim_2x2(q);
    const Matrix<double> inv = invert_matrix(fim);
    const double cond = norm1(fim) * norm1(inv);
    if (!(cond <= 1e12)) {
        throw std::runtime_error("crb_2x2: Fisher information is near singular");
    }
    double diag = 0.0;
    for (uint32_t i = 0; i < 4; ++i) diag += inv(i, i);
    return diag / 4.0 / static_cast<double>(frames);
}

}  // namespace rowcol
