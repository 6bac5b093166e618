// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "rowcol/types.hpp"

namespace rowcol {

inline constexpr double kDefaultFluxClamp = 50.0;
inline constexpr double kDefaultPpfTol = 1e-9;

/// Saturation map q = 1 - exp(-lambda), elementwise.
DetectionProbMap detection_prob_from_flux(const FluxImage& flux);

/// Exact inverse of the saturation map, lambda = -log(1 - q), clamped to
/// clamp_max once q is within exp(-clamp_max) of 1.
FluxImage flux_from_detection_prob(const DetectionProbMap& q,
                                   double clamp_max = kDefaultFluxClamp);

/// Expected detected photons per frame: sum of all q_ij.
double mean_ppf(const DetectionProbMap& q);

/// Scalar alpha > 0 such that mean_ppf(detection_prob_from_flux(alpha * flux))
/// hits target_ppf within tol. Bisection; the objective is strictly increasing
/// in alpha. Throws when the target is not reachable.
double calibrate_attenuation(const FluxImage& flux, double target_ppf,
                             double tol = kDefaultPpfTol);

/// One frame of per-pixel Bernoulli(1 - exp(-lambda)) detections.
/// Equals frame 0 of simulate_batch with the same seed.
IncidenceFrame sample_incidence(const FluxImage& flux, RandomSeed seed);

/// Row/column OR-reduction of an incidence frame.
ReadoutFrame readout_of(const IncidenceFrame& y);

/// Same reduction on packed incidence bits; mask spans must be zeroed.
void readout_from_bits(std::span<const uint64_t> incidence, uint32_t rows, uint32_t cols,
                       std::span<uint64_t> row_mask, std::span<uint64_t> col_mask);

/// Empty / Unambiguous / Ambiguous per the fired row and column counts.
/// Throws on frames that fire rows without columns or vice versa.
FrameClass classify_readout(const ReadoutFrame& r);
FrameClass classify_masks(std::span<const uint64_t> row_mask,
                          std::span<const uint64_t> col_mask);

/// T independent frames (sample_incidence then readout_of), frame t drawn from
/// the counter-based substream for (seed, t). Parallelizes over frames without
/// changing the output.
FrameBatch simulate_batch(const FluxImage& flux, uint64_t frame_count, RandomSeed seed,
                          bool keep_truth = false);

/// simulate_batch staged on a precomputed probability map (saves the per-call
/// exp when the same flux drives many batches).
FrameBatch simulate_batch_q(const DetectionProbMap& q, uint64_t frame_count,
                            RandomSeed seed, bool keep_truth = false);

}  // namespace rowcol
