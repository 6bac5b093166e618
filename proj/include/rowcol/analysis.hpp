// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "rowcol/estimators.hpp"
#include "rowcol/types.hpp"

namespace rowcol {

/// Per-pixel mean-squared error and peak signal-to-noise ratio. peak empty
/// means "max entry of truth"; a zero peak is rejected. Zero MSE reports
/// +infinity PSNR.
std::pair<double, double> error_metrics(const FluxImage& estimate, const FluxImage& truth,
                                        std::optional<double> peak = std::nullopt);

/// Expected overestimation of the naive estimator at each pixel:
/// (1-q_ij) (1 - prod_{k!=i}(1-q_kj)) (1 - prod_{l!=j}(1-q_il)).
Matrix<double> analytic_naive_bias(const DetectionProbMap& q);

/// Per-pixel success probability of the naive indicator R_i C_j
/// (q_ij plus the naive bias).
Matrix<double> naive_qprime(const DetectionProbMap& q);

struct ErrorReport {
    double mse = 0.0;   // flux domain, per pixel, averaged over trials
    double psnr = 0.0;  // dB, from the averaged MSE
    Matrix<double> per_pixel_bias;      // q domain: mean(q_hat) - q
    Matrix<double> per_pixel_variance;  // q domain, population variance
    Matrix<double> per_pixel_mse;       // q domain: mean((q_hat - q)^2)
    uint32_t trials = 0;
};

/// trials independent simulate-then-estimate cycles on the given flux.
/// Bias/variance are reported in the probability domain, MSE/PSNR in the flux
/// domain against the input flux.
ErrorReport empirical_bias_variance(const EstimatorSpec& estimator, const FluxImage& flux,
                                    uint64_t frames, uint32_t trials, RandomSeed seed);

/// Probabilities of the ten readout event classes of a 2x2 array: empty,
/// four singles (row-major pixel order), four unambiguous pairs (top row,
/// left column, right column, bottom row), and the aggregated ambiguous class.
std::array<double, 10> event_probabilities_2x2(const DetectionProbMap& q);

/// Per-frame Fisher information for the 2x2 detection probabilities, ordered
/// (q11, q12, q21, q22). Requires every q strictly inside (0, 1).
Matrix<double> fim_2x2(const DetectionProbMap& q);

/// Mean of the diagonal of the inverse per-frame FIM, divided by the frame
/// count. Rejects near-singular information (1-norm condition > 1e12).
double crb_2x2(const DetectionProbMap& q, uint64_t frames);

/// Dense inverse by partial-pivot elimination; throws on singular input.
Matrix<double> invert_matrix(const Matrix<double>& m);

}  // namespace rowcol
