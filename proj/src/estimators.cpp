// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/estimators.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include "rowcol/candidates.hpp"
#include "rowcol/model.hpp"
#include "rowcol/rng.hpp"

namespace rowcol {

namespace {

template <class Fn>
void for_each_set_bit(std::span<const uint64_t> words, Fn&& fn) {
    for (size_t w = 0; w < words.size(); ++w) {
        uint64_t bits = words[w];
        while (bits != 0) {
            fn(static_cast<uint32_t>(w * 64 + std::countr_zero(bits)));
            bits &= bits - 1;
        }
    }
}

std::vector<uint32_t> set_bit_indices(std::span<const uint64_t> words) {
    std::vector<uint32_t> out;
    for_each_set_bit(words, [&](uint32_t i) { out.push_back(i); });
    return out;
}

DetectionProbMap scaled_probs(const Matrix<double>& acc, uint64_t total) {
    Matrix<double> q(acc.rows(), acc.cols());
    const double inv = total > 0 ? 1.0 / static_cast<double>(total) : 0.0;
    for (size_t i = 0; i < acc.size(); ++i) {
        q.values()[i] = std::clamp(acc.values()[i] * inv, 0.0, 1.0);
    }
    return DetectionProbMap(std::move(q));
}

}  // namespace

EstimatorSpec parse_estimator(const std::string& name) {
    if (name == "naive") return {EstimatorKind::Naive, 0};
    if (name == "spe") return {EstimatorKind::SinglePhoton, 0};
    if (name == "random") return {EstimatorKind::Randomized, 0};
    if (name == "unambiguous") return {EstimatorKind::Unambiguous, 0};
    if (name == "oracle") return {EstimatorKind::FullReadout, 0};
    if (name.size() > 2 && name.compare(0, 2, "me") == 0) {
        uint32_t k = 0;
        const auto [ptr, ec] =
            std::from_chars(name.data() + 2, name.data() + name.size(), k);
        if (ec == std::errc{} && ptr == name.data() + name.size() && k >= 2) {
            return {EstimatorKind::Multiphoton, k};
        }
    }
    throw std::invalid_argument("unknown estimator: " + name);
}

std::string estimator_name(const EstimatorSpec& spec) {
    switch (spec.kind) {
        case EstimatorKind::Naive: return "naive";
        case EstimatorKind::SinglePhoton: return "spe";
        case EstimatorKind::Randomized: return "random";
        case EstimatorKind::Unambiguous: return "unambiguous";
        case EstimatorKind::FullReadout: return "oracle";
        case EstimatorKind::Multiphoton: return "me" + std::to_string(spec.k_max);
    }
    return "?";
}

ProbEstimate estimate_naive(const FrameBatch& batch) {
    if (batch.size() == 0) throw std::invalid_argument("estimate_naive: empty batch");
    Matrix<uint64_t> acc(batch.rows(), batch.cols(), 0);
    for (uint64_t t = 0; t < batch.size(); ++t) {
        for_each_set_bit(batch.row_mask(t), [&](uint32_t i) {
            for_each_set_bit(batch.col_mask(t), [&](uint32_t j) { ++acc(i, j); });
        });
    }
    Matrix<double> accd(batch.rows(), batch.cols());
    for (size_t i = 0; i < acc.size(); ++i) {
        accd.values()[i] = static_cast<double>(acc.values()[i]);
    }
    return ProbEstimate{scaled_probs(accd, batch.size()), "naive", batch.size(), 0};
}

ProbEstimate estimate_naive(const FrameTallies& t) {
    Matrix<double> acc(t.rows, t.cols, 0.0);
    for (size_t i = 0; i < acc.size(); ++i) {
        acc.values()[i] = static_cast<double>(t.unambiguous_hits.values()[i]);
    }
    const size_t rw = words_for_bits(t.rows);
    for (const auto& [key, count] : t.ambiguous) {
        const std::span<const uint64_t> row_words(key.words.data(), rw);
        const std::span<const uint64_t> col_words(key.words.data() + rw,
                                                  key.words.size() - rw);
        for_each_set_bit(row_words, [&](uint32_t i) {
            for_each_set_bit(col_words, [&](uint32_t j) {
                acc(i, j) += static_cast<double>(count);
            });
        });
    }
    return ProbEstimate{scaled_probs(acc, t.total), "naive", t.total, 0};
}

ProbEstimate estimate_single_photon(const FrameTallies& t) {
    Matrix<double> q(t.rows, t.cols);
    for (size_t i = 0; i < q.size(); ++i) {
        const uint64_t n_ij = t.single_counts.values()[i];
        const uint64_t denom = n_ij + t.n_empty;
        q.values()[i] = denom > 0
                            ? static_cast<double>(n_ij) / static_cast<double>(denom)
                            : 0.0;
    }
    return ProbEstimate{DetectionProbMap(std::move(q)), "spe", t.total, 0};
}

ProbEstimate estimate_single_photon(const FrameBatch& batch) {
    if (batch.size() == 0) {
        throw std::invalid_argument("estimate_single_photon: empty batch");
    }
    return estimate_single_photon(tally_frames(batch));
}

ProbEstimate estimate_unambiguous(const FrameTallies& t) {
    Matrix<double> acc(t.rows, t.cols);
    for (size_t i = 0; i < acc.size(); ++i) {
        acc.values()[i] = static_cast<double>(t.unambiguous_hits.values()[i]);
    }
    ProbEstimate est{scaled_probs(acc, t.unambiguous_total), "unambiguous",
                     t.unambiguous_total, 0};
    return est;
}

ProbEstimate estimate_unambiguous(const FrameBatch& batch) {
    if (batch.size() == 0) {
        throw std::invalid_argument("estimate_unambiguous: empty batch");
    }
    return estimate_unambiguous(tally_frames(batch));
}

ProbEstimate estimate_full_readout(const FrameBatch& batch) {
    if (batch.size() == 0) {
        throw std::invalid_argument("estimate_full_readout: empty batch");
    }
    if (!batch.has_truth()) {
        throw std::invalid_argument(
            "estimate_full_readout: batch does not carry incidence truth");
    }
    Matrix<double> acc(batch.rows(), batch.cols(), 0.0);
    for (uint64_t t = 0; t < batch.size(); ++t) {
        for_each_set_bit(batch.truth_bits(t),
                         [&](uint32_t p) { acc.values()[p] += 1.0; });
    }
    return ProbEstimate{scaled_probs(acc, batch.size()), "oracle", batch.size(), 0};
}

namespace {

// Uniform pattern over all submatrix masks with full row and column support,
// by rejection on uniform bits. Equivalent to a uniform pick from
// enumerate_candidates with k_max = a * b, without materializing the set.
void sample_uniform_pattern(uint64_t seed, uint64_t frame, uint32_t a, uint32_t b,
                            std::vector<uint64_t>& mask_out) {
    const uint64_t cells = static_cast<uint64_t>(a) * b;
    const size_t mask_words = words_for_bits(cells);
    mask_out.assign(mask_words, 0);
    const uint32_t blocks_per_attempt = static_cast<uint32_t>((cells + 127) / 128);
    const uint64_t full_tail =
        (cells % 64) ? ((uint64_t{1} << (cells % 64)) - 1) : ~uint64_t{0};

    std::vector<uint64_t> cover(words_for_bits(b));
    for (uint32_t attempt = 0; attempt < 65536; ++attempt) {
        for (uint32_t blk = 0; blk < blocks_per_attempt; ++blk) {
            const rng::Block out = rng::frame_block(
                rng::kStreamAssignment, frame, attempt * blocks_per_attempt + blk, seed);
            const uint64_t lo =
                (static_cast<uint64_t>(out.x[1]) << 32) | out.x[0];
            const uint64_t hi =
                (static_cast<uint64_t>(out.x[3]) << 32) | out.x[2];
            if (2 * blk < mask_words) mask_out[2 * blk] = lo;
            if (2 * blk + 1 < mask_words) mask_out[2 * blk + 1] = hi;
        }
        mask_out[mask_words - 1] &= full_tail;

        bool rows_ok = true;
        std::fill(cover.begin(), cover.end(), 0);
        for (uint32_t ri = 0; ri < a && rows_ok; ++ri) {
            const uint64_t pos = static_cast<uint64_t>(ri) * b;
            if (!any_bits_in_range(mask_out, pos, b)) {
                rows_ok = false;
            } else {
                or_extract_bits(mask_out, pos, b, cover);
            }
        }
        if (!rows_ok) continue;
        uint32_t covered = 0;
        for (uint64_t w : cover) covered += static_cast<uint32_t>(std::popcount(w));
        if (covered == b) return;
    }
    throw std::logic_error("sample_uniform_pattern: rejection sampling stalled");
}

}  // namespace

ProbEstimate estimate_randomized(const FrameBatch& batch, RandomSeed seed) {
    if (batch.size() == 0) {
        throw std::invalid_argument("estimate_randomized: empty batch");
    }
    Matrix<uint64_t> acc(batch.rows(), batch.cols(), 0);
    std::vector<uint64_t> mask;
    for (uint64_t t = 0; t < batch.size(); ++t) {
        const FrameClass cls = classify_masks(batch.row_mask(t), batch.col_mask(t));
        if (cls.tag == FrameTag::Empty) continue;
        if (cls.tag == FrameTag::Unambiguous) {
            for_each_set_bit(batch.row_mask(t), [&](uint32_t i) {
                for_each_set_bit(batch.col_mask(t), [&](uint32_t j) { ++acc(i, j); });
            });
            continue;
        }
        const auto rows = set_bit_indices(batch.row_mask(t));
        const auto cols = set_bit_indices(batch.col_mask(t));
        const uint32_t a = static_cast<uint32_t>(rows.size());
        const uint32_t b = static_cast<uint32_t>(cols.size());
        sample_uniform_pattern(seed, t, a, b, mask);
        for_each_set_bit(mask, [&](uint32_t cell) {
            acc(rows[cell / b], cols[cell % b]) += 1;
        });
    }
    Matrix<double> accd(batch.rows(), batch.cols());
    for (size_t i = 0; i < acc.size(); ++i) {
        accd.values()[i] = static_cast<double>(acc.values()[i]);
    }
    return ProbEstimate{scaled_probs(accd, batch.size()), "random", batch.size(), 0};
}

ProbEstimate estimate_multiphoton(const FrameTallies& t, uint32_t k_max) {
    if (k_max < 1) throw std::invalid_argument("estimate_multiphoton: k_max must be >= 1");
    const ProbEstimate spe = estimate_single_photon(t);

    Matrix<double> acc(t.rows, t.cols, 0.0);
    for (size_t i = 0; i < acc.size(); ++i) {
        acc.values()[i] = static_cast<double>(t.unambiguous_hits.values()[i]);
    }

    const size_t rw = words_for_bits(t.rows);
    uint64_t discarded = 0;
    std::vector<double> sub_q, weights, cell_mass;
    for (const auto& [key, count] : t.ambiguous) {
        const std::span<const uint64_t> row_words(key.words.data(), rw);
        const std::span<const uint64_t> col_words(key.words.data() + rw,
                                                  key.words.size() - rw);
        const auto rows = set_bit_indices(row_words);
        const auto cols = set_bit_indices(col_words);
        const uint32_t a = static_cast<uint32_t>(rows.size());
        const uint32_t b = static_cast<uint32_t>(cols.size());
        // Readouts implying more than k_max photons are explained by their
        // minimum consistent count instead of being thrown away: discarding
        // them would bias the bright pixels that dominate such frames.
        // Beyond kMaxImputedPhotons the candidate count explodes and the
        // frame is dropped (counted below).
        const uint32_t k_eff = std::max(k_max, std::max(a, b));
        if (std::max(a, b) > kMaxImputedPhotons ||
            static_cast<uint64_t>(a) * b > 64) {
            discarded += count;
            continue;
        }
        const auto& patterns = canonical_patterns(a, b, k_eff);
        const uint32_t cells = a * b;
        sub_q.resize(cells);
        for (uint32_t ri = 0; ri < a; ++ri) {
            for (uint32_t ci = 0; ci < b; ++ci) {
                sub_q[ri * b + ci] = spe.q_hat(rows[ri], cols[ci]);
            }
        }
        weight_patterns(patterns, sub_q.data(), cells, weights);

        cell_mass.assign(cells, 0.0);
        for (size_t p = 0; p < patterns.size(); ++p) {
            uint64_t bits = patterns[p];
            while (bits != 0) {
                cell_mass[std::countr_zero(bits)] += weights[p];
                bits &= bits - 1;
            }
        }
        const double scale = static_cast<double>(count);
        for (uint32_t ri = 0; ri < a; ++ri) {
            for (uint32_t ci = 0; ci < b; ++ci) {
                acc(rows[ri], cols[ci]) += scale * cell_mass[ri * b + ci];
            }
        }
    }

    // Normalize by the modeled frame count: frames whose readout cannot be
    // explained by k_max photons carry no imputable mass, and keeping them in
    // the denominator would shrink every estimate by the discarded fraction.
    ProbEstimate est{scaled_probs(acc, t.total - discarded),
                     "me" + std::to_string(k_max), t.total - discarded, discarded};
    return est;
}

ProbEstimate estimate_multiphoton(const FrameBatch& batch, uint32_t k_max) {
    if (batch.size() == 0) {
        throw std::invalid_argument("estimate_multiphoton: empty batch");
    }
    return estimate_multiphoton(tally_frames(batch), k_max);
}

ProbEstimate run_estimator(const EstimatorSpec& spec, const FrameBatch& batch,
                           RandomSeed seed) {
    switch (spec.kind) {
        case EstimatorKind::Naive: return estimate_naive(batch);
        case EstimatorKind::SinglePhoton: return estimate_single_photon(batch);
        case EstimatorKind::Randomized: return estimate_randomized(batch, seed);
        case EstimatorKind::Unambiguous: return estimate_unambiguous(batch);
        case EstimatorKind::FullReadout: return estimate_full_readout(batch);
        case EstimatorKind::Multiphoton: return estimate_multiphoton(batch, spec.k_max);
    }
    throw std::logic_error("run_estimator: unreachable");
}

}  // namespace rowcol
