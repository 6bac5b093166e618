// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/model.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rowcol/kernels.hpp"
#include "rowcol/parallel.hpp"

namespace rowcol {

DetectionProbMap detection_prob_from_flux(const FluxImage& flux) {
    Matrix<double> q(flux.rows(), flux.cols());
    auto out = q.values();
    auto in = flux.values().values();
    for (size_t i = 0; i < in.size(); ++i) {
        out[i] = -std::expm1(-in[i]);
    }
    return DetectionProbMap(std::move(q));
}

FluxImage flux_from_detection_prob(const DetectionProbMap& q, double clamp_max) {
    if (!(clamp_max > 0.0)) {
        throw std::invalid_argument("flux_from_detection_prob: clamp_max must be > 0");
    }
    const double q_clamp = -std::expm1(-clamp_max);
    Matrix<double> lambda(q.rows(), q.cols());
    auto out = lambda.values();
    auto in = q.values().values();
    for (size_t i = 0; i < in.size(); ++i) {
        out[i] = in[i] >= q_clamp ? clamp_max : -std::log1p(-in[i]);
    }
    return FluxImage(std::move(lambda));
}

double mean_ppf(const DetectionProbMap& q) {
    double sum = 0.0;
    for (double v : q.values().values()) sum += v;
    return sum;
}

namespace {

double ppf_at_scale(std::span<const double> flux, double alpha) {
    double sum = 0.0;
    for (double v : flux) sum += -std::expm1(-alpha * v);
    return sum;
}

}  // namespace

double calibrate_attenuation(const FluxImage& flux, double target_ppf, double tol) {
    const auto values = flux.values().values();
    size_t positive = 0;
    for (double v : values) positive += v > 0.0;
    if (positive == 0) {
        throw std::invalid_argument("calibrate_attenuation: flux has no positive pixel");
    }
    if (!(target_ppf > 0.0)) {
        throw std::invalid_argument("calibrate_attenuation: target_ppf must be > 0");
    }
    // sum(1 - exp(-alpha * flux)) approaches the positive-pixel count from
    // below as alpha grows, so anything at or above it is unreachable.
    if (target_ppf >= static_cast<double>(positive)) {
        throw std::invalid_argument("calibrate_attenuation: target_ppf unreachable");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("calibrate_attenuation: tol must be > 0");
    }

    double hi = 1.0;
    int doublings = 0;
    while (ppf_at_scale(values, hi) < target_ppf) {
        hi *= 2.0;
        if (++doublings > 600) {
            throw std::runtime_error("calibrate_attenuation: failed to bracket target");
        }
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double ppf = ppf_at_scale(values, mid);
        if (std::abs(ppf - target_ppf) <= tol) return mid;
        if (ppf < target_ppf) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void readout_from_bits(std::span<const uint64_t> incidence, uint32_t rows, uint32_t cols,
                       std::span<uint64_t> row_mask, std::span<uint64_t> col_mask) {
    for (uint32_t r = 0; r < rows; ++r) {
        const uint64_t pos = static_cast<uint64_t>(r) * cols;
        if (any_bits_in_range(incidence, pos, cols)) {
            row_mask[r >> 6] |= uint64_t{1} << (r & 63);
            or_extract_bits(incidence, pos, cols, col_mask);
        }
    }
}

ReadoutFrame readout_of(const IncidenceFrame& y) {
    ReadoutFrame out{BitVec(y.rows()), BitVec(y.cols())};
    readout_from_bits(y.words(), y.rows(), y.cols(), out.row_mask.words(),
                      out.col_mask.words());
    return out;
}

FrameClass classify_masks(std::span<const uint64_t> row_mask,
                          std::span<const uint64_t> col_mask) {
    uint32_t fr = 0, fc = 0;
    for (uint64_t w : row_mask) fr += static_cast<uint32_t>(std::popcount(w));
    for (uint64_t w : col_mask) fc += static_cast<uint32_t>(std::popcount(w));
    if ((fr == 0) != (fc == 0)) {
        throw std::invalid_argument("classify_readout: rows fired without columns");
    }
    FrameTag tag = FrameTag::Ambiguous;
    if (fr == 0) {
        tag = FrameTag::Empty;
    } else if (fr == 1 || fc == 1) {
        tag = FrameTag::Unambiguous;
    }
    return FrameClass{tag, fr, fc};
}

FrameClass classify_readout(const ReadoutFrame& r) {
    return classify_masks(r.row_mask.words(), r.col_mask.words());
}

IncidenceFrame sample_incidence(const FluxImage& flux, RandomSeed seed) {
    const DetectionProbMap q = detection_prob_from_flux(flux);
    IncidenceFrame y(flux.rows(), flux.cols());
    kernels::FrameSampler sampler(q.values().values(), seed);
    sampler.sample(0, y.words());
    return y;
}

FrameBatch simulate_batch_q(const DetectionProbMap& q, uint64_t frame_count,
                            RandomSeed seed, bool keep_truth) {
    if (frame_count == 0) {
        throw std::invalid_argument("simulate_batch: frame_count must be >= 1");
    }
    const uint32_t rows = q.rows();
    const uint32_t cols = q.cols();
    FrameBatch batch(rows, cols, frame_count, keep_truth);
    const kernels::FrameSampler sampler(q.values().values(), seed);
    const size_t frame_words = words_for_bits(static_cast<uint64_t>(rows) * cols);

    parallel_for(frame_count, [&](uint64_t begin, uint64_t end) {
        std::vector<uint64_t> scratch;
        if (!keep_truth) scratch.resize(frame_words);
        for (uint64_t t = begin; t < end; ++t) {
            std::span<uint64_t> bits =
                keep_truth ? batch.truth_bits(t) : std::span<uint64_t>(scratch);
            sampler.sample(t, bits);
            readout_from_bits(bits, rows, cols, batch.row_mask(t), batch.col_mask(t));
        }
    });
    return batch;
}

FrameBatch simulate_batch(const FluxImage& flux, uint64_t frame_count, RandomSeed seed,
                          bool keep_truth) {
    return simulate_batch_q(detection_prob_from_flux(flux), frame_count, seed, keep_truth);
}

}  // namespace rowcol
