// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "rowcol/types.hpp"

namespace rowcol {

/// All incidence patterns consistent with one readout, truncated to at most
/// k_max photons. Patterns live on the fired-rows x fired-cols submatrix and
/// are stored as row-major bit masks over its cells (at most 64 cells).
class CandidateSet {
public:
    CandidateSet(ReadoutFrame readout, std::vector<uint32_t> fired_rows,
                 std::vector<uint32_t> fired_cols, uint32_t k_max,
                 std::vector<uint64_t> patterns)
        : readout_(std::move(readout)), fired_rows_(std::move(fired_rows)),
          fired_cols_(std::move(fired_cols)), k_max_(k_max),
          patterns_(std::move(patterns)) {}

    const ReadoutFrame& readout() const { return readout_; }
    const std::vector<uint32_t>& fired_rows() const { return fired_rows_; }
    const std::vector<uint32_t>& fired_cols() const { return fired_cols_; }
    uint32_t k_max() const { return k_max_; }

    size_t size() const { return patterns_.size(); }
    bool empty() const { return patterns_.empty(); }

    /// Row-major mask over the fired submatrix; cell (ri, ci) is bit
    /// ri * fired_cols + ci.
    uint64_t pattern_mask(size_t idx) const { return patterns_[idx]; }
    const std::vector<uint64_t>& pattern_masks() const { return patterns_; }

    /// Materialize pattern idx on the full array.
    IncidenceFrame pattern(size_t idx) const;

private:
    ReadoutFrame readout_;
    std::vector<uint32_t> fired_rows_;
    std::vector<uint32_t> fired_cols_;
    uint32_t k_max_;
    std::vector<uint64_t> patterns_;
};

/// Enumerate the candidate patterns of a readout. Unambiguous readouts give
/// the single exact pattern (when its photon count fits in k_max), empty
/// readouts the all-zero pattern, and ambiguous readouts every submatrix
/// pattern whose row support, column support, and popcount fit. An empty set
/// means the readout implies more than k_max photons.
CandidateSet enumerate_candidates(const ReadoutFrame& readout, uint32_t k_max);

/// Patterns on a canonical a x b grid: every row and column covered, popcount
/// at most k_max. Cached per (a, b, k_max); the cache is thread-local.
const std::vector<uint64_t>& canonical_patterns(uint32_t fired_rows, uint32_t fired_cols,
                                                uint32_t k_max);

struct WeightedCandidates {
    CandidateSet candidates;
    std::vector<double> weights;  // nonnegative, sum to 1
};

/// Conditional probability of each candidate given the readout, estimated by
/// the Bernoulli product of q_ref over the fired submatrix (factors outside
/// the submatrix are common to all candidates and cancel). Falls back to
/// uniform weights when every product underflows to zero.
WeightedCandidates candidate_weights(const CandidateSet& candidates,
                                     const DetectionProbMap& q_ref);

/// Weight computation on a gathered submatrix probability vector; writes
/// normalized per-pattern weights. Returns false (and uniform weights) when
/// the total mass is below 1e-300.
bool weight_patterns(const std::vector<uint64_t>& patterns, const double* sub_q,
                     uint32_t cells, std::vector<double>& weights_out);

}  // namespace rowcol
