// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "rowcol/tally.hpp"
#include "rowcol/types.hpp"

namespace rowcol {

enum class EstimatorKind : uint8_t {
    Naive,         // imputes every row x column intersection
    SinglePhoton,  // empty and single-detection frames only
    Randomized,    // one uniformly random candidate per ambiguous frame
    Unambiguous,   // discards only ambiguous frames
    FullReadout,   // oracle: per-pixel incidence frequency (needs truth)
    Multiphoton,   // weighted candidate imputation, up to k_max photons
};

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::Multiphoton;
    uint32_t k_max = 4;  // Multiphoton only

    friend bool operator==(const EstimatorSpec&, const EstimatorSpec&) = default;
};

/// Hard cap on photons imputed per frame by the multiphoton estimator.
/// Readouts whose minimum consistent photon count exceeds this are discarded.
inline constexpr uint32_t kMaxImputedPhotons = 8;

/// CLI names: naive, spe, random, unambiguous, oracle, me2, me3, me4.
/// Multiphoton accepts any meK with K >= 2 for internal experiments.
EstimatorSpec parse_estimator(const std::string& name);
std::string estimator_name(const EstimatorSpec& spec);

struct ProbEstimate {
    DetectionProbMap q_hat;
    std::string estimator_id;
    /// Frames that contributed mass (excludes frames discarded by truncation).
    uint64_t frames_used = 0;
    /// Ambiguous frames whose readout implies more than k_max photons.
    uint64_t frames_discarded = 0;
};

ProbEstimate estimate_naive(const FrameBatch& batch);
ProbEstimate estimate_single_photon(const FrameBatch& batch);
ProbEstimate estimate_randomized(const FrameBatch& batch, RandomSeed seed);
ProbEstimate estimate_unambiguous(const FrameBatch& batch);
ProbEstimate estimate_full_readout(const FrameBatch& batch);
ProbEstimate estimate_multiphoton(const FrameBatch& batch, uint32_t k_max);

// Tally-based variants; exact reformulations of the per-frame definitions.
ProbEstimate estimate_naive(const FrameTallies& tallies);
ProbEstimate estimate_single_photon(const FrameTallies& tallies);
ProbEstimate estimate_unambiguous(const FrameTallies& tallies);
ProbEstimate estimate_multiphoton(const FrameTallies& tallies, uint32_t k_max);

/// Dispatch on spec; seed feeds only the randomized estimator.
ProbEstimate run_estimator(const EstimatorSpec& spec, const FrameBatch& batch,
                           RandomSeed seed);

}  // namespace rowcol
