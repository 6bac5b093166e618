// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/candidates.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "rowcol/model.hpp"

namespace rowcol {

namespace {

// Depth-first enumeration: each fired row takes a nonempty column subset;
// prune when the remaining photon budget cannot cover the remaining rows or
// the still-uncovered columns.
void enumerate_grid(uint32_t a, uint32_t b, uint32_t k_max, uint32_t row,
                    uint32_t col_cover, uint32_t used, uint64_t mask,
                    std::vector<uint64_t>& out) {
    const uint32_t full_cols = (uint32_t{1} << b) - 1;
    if (row == a) {
        if (col_cover == full_cols) out.push_back(mask);
        return;
    }
    const uint32_t rows_left = a - row;
    const uint32_t budget = k_max - used;
    const uint32_t uncovered =
        static_cast<uint32_t>(std::popcount(full_cols & ~col_cover));
    if (budget < rows_left || budget < uncovered) return;

    for (uint32_t subset = 1; subset <= full_cols; ++subset) {
        const uint32_t ones = static_cast<uint32_t>(std::popcount(subset));
        if (used + ones > k_max) continue;
        enumerate_grid(a, b, k_max, row + 1, col_cover | subset, used + ones,
                       mask | (static_cast<uint64_t>(subset) << (row * b)), out);
    }
}

struct GridKey {
    uint32_t a, b, k;
    friend bool operator==(const GridKey&, const GridKey&) = default;
};
struct GridKeyHash {
    size_t operator()(const GridKey& k) const {
        return (static_cast<size_t>(k.a) << 40) ^ (static_cast<size_t>(k.b) << 20) ^ k.k;
    }
};

}  // namespace

const std::vector<uint64_t>& canonical_patterns(uint32_t fired_rows, uint32_t fired_cols,
                                                uint32_t k_max) {
    thread_local std::unordered_map<GridKey, std::vector<uint64_t>, GridKeyHash> cache;
    const GridKey key{fired_rows, fired_cols, k_max};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    if (static_cast<uint64_t>(fired_rows) * fired_cols > 64) {
        throw std::invalid_argument(
            "canonical_patterns: fired submatrix exceeds 64 cells");
    }
    std::vector<uint64_t> patterns;
    if (fired_rows == 0 || fired_cols == 0) {
        patterns.push_back(0);  // the all-zero pattern of an empty readout
    } else {
        enumerate_grid(fired_rows, fired_cols, std::min(k_max, fired_rows * fired_cols),
                       0, 0, 0, 0, patterns);
    }
    return cache.emplace(key, std::move(patterns)).first->second;
}

CandidateSet enumerate_candidates(const ReadoutFrame& readout, uint32_t k_max) {
    if (k_max < 1) throw std::invalid_argument("enumerate_candidates: k_max must be >= 1");
    classify_readout(readout);  // rejects inconsistent frames
    std::vector<uint32_t> rows = readout.row_mask.set_bits();
    std::vector<uint32_t> cols = readout.col_mask.set_bits();
    const auto& patterns = canonical_patterns(static_cast<uint32_t>(rows.size()),
                                              static_cast<uint32_t>(cols.size()), k_max);
    return CandidateSet(readout, std::move(rows), std::move(cols), k_max, patterns);
}

IncidenceFrame CandidateSet::pattern(size_t idx) const {
    IncidenceFrame y(readout_.row_mask.size(), readout_.col_mask.size());
    const uint64_t mask = patterns_[idx];
    const uint32_t b = static_cast<uint32_t>(fired_cols_.size());
    for (uint32_t ri = 0; ri < fired_rows_.size(); ++ri) {
        for (uint32_t ci = 0; ci < b; ++ci) {
            if ((mask >> (ri * b + ci)) & 1u) {
                y.set(fired_rows_[ri], fired_cols_[ci]);
            }
        }
    }
    return y;
}

bool weight_patterns(const std::vector<uint64_t>& patterns, const double* sub_q,
                     uint32_t cells, std::vector<double>& weights_out) {
    weights_out.resize(patterns.size());
    double total = 0.0;
    for (size_t p = 0; p < patterns.size(); ++p) {
        const uint64_t mask = patterns[p];
        double w = 1.0;
        for (uint32_t c = 0; c < cells; ++c) {
            w *= ((mask >> c) & 1u) ? sub_q[c] : 1.0 - sub_q[c];
        }
        weights_out[p] = w;
        total += w;
    }
    if (!(total > 1e-300)) {
        const double uniform = 1.0 / static_cast<double>(patterns.size());
        std::fill(weights_out.begin(), weights_out.end(), uniform);
        return false;
    }
    const double inv = 1.0 / total;
    for (double& w : weights_out) w *= inv;
    return true;
}

WeightedCandidates candidate_weights(const CandidateSet& candidates,
                                     const DetectionProbMap& q_ref) {
    if (candidates.empty()) {
        throw std::invalid_argument("candidate_weights: empty candidate set");
    }
    const auto& rows = candidates.fired_rows();
    const auto& cols = candidates.fired_cols();
    const uint32_t cells = static_cast<uint32_t>(rows.size() * cols.size());
    std::vector<double> sub_q(cells);
    for (size_t ri = 0; ri < rows.size(); ++ri) {
        for (size_t ci = 0; ci < cols.size(); ++ci) {
            sub_q[ri * cols.size() + ci] = q_ref(rows[ri], cols[ci]);
        }
    }
    std::vector<double> weights;
    weight_patterns(candidates.pattern_masks(), sub_q.data(), cells, weights);
    return WeightedCandidates{candidates, std::move(weights)};
}

}  // namespace rowcol
