// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rowcol/bitvec.hpp"
#include "rowcol/matrix.hpp"

namespace rowcol {

using RandomSeed = uint64_t;

/// Mean photon arrivals per pixel per integration period. Entries are
/// finite and nonnegative.
class FluxImage {
public:
    explicit FluxImage(Matrix<double> values);

    uint32_t rows() const { return values_.rows(); }
    uint32_t cols() const { return values_.cols(); }
    const Matrix<double>& values() const { return values_; }
    double operator()(uint32_t i, uint32_t j) const { return values_(i, j); }

    friend bool operator==(const FluxImage&, const FluxImage&) = default;

private:
    Matrix<double> values_;
};

/// Per-pixel probability that at least one photon is detected in a frame.
class DetectionProbMap {
public:
    explicit DetectionProbMap(Matrix<double> values);

    uint32_t rows() const { return values_.rows(); }
    uint32_t cols() const { return values_.cols(); }
    const Matrix<double>& values() const { return values_; }
    double operator()(uint32_t i, uint32_t j) const { return values_(i, j); }

    friend bool operator==(const DetectionProbMap&, const DetectionProbMap&) = default;

private:
    Matrix<double> values_;
};

/// Binary detections for one frame, packed row-major (bit p = pixel p).
class IncidenceFrame {
public:
    IncidenceFrame(uint32_t rows, uint32_t cols)
        : rows_(rows), cols_(cols),
          words_(words_for_bits(static_cast<uint64_t>(rows) * cols), 0) {
        if (rows == 0 || cols == 0) {
            throw std::invalid_argument("IncidenceFrame: dimensions must be positive");
        }
    }

    static IncidenceFrame from_words(uint32_t rows, uint32_t cols,
                                     std::span<const uint64_t> words) {
        IncidenceFrame f(rows, cols);
        if (words.size() != f.words_.size()) {
            throw std::invalid_argument("IncidenceFrame: word count mismatch");
        }
        f.words_.assign(words.begin(), words.end());
        return f;
    }

    uint32_t rows() const { return rows_; }
    uint32_t cols() const { return cols_; }
    uint64_t pixel_count() const { return static_cast<uint64_t>(rows_) * cols_; }

    bool get(uint32_t i, uint32_t j) const {
        const uint64_t p = static_cast<uint64_t>(i) * cols_ + j;
        return (words_[p >> 6] >> (p & 63)) & 1u;
    }
    void set(uint32_t i, uint32_t j, bool value = true) {
        const uint64_t p = static_cast<uint64_t>(i) * cols_ + j;
        const uint64_t mask = uint64_t{1} << (p & 63);
        if (value) {
            words_[p >> 6] |= mask;
        } else {
            words_[p >> 6] &= ~mask;
        }
    }

    uint32_t count() const {
        uint32_t c = 0;
        for (uint64_t w : words_) c += static_cast<uint32_t>(std::popcount(w));
        return c;
    }
    bool any() const { return count() != 0; }

    std::span<const uint64_t> words() const { return words_; }
    std::span<uint64_t> words() { return words_; }

    friend bool operator==(const IncidenceFrame&, const IncidenceFrame&) = default;

private:
    uint32_t rows_;
    uint32_t cols_;
    std::vector<uint64_t> words_;
};

/// One multiplexed measurement: which rows and which columns saw a detection.
struct ReadoutFrame {
    BitVec row_mask;
    BitVec col_mask;

    friend bool operator==(const ReadoutFrame&, const ReadoutFrame&) = default;
};

enum class FrameTag : uint8_t { Empty, Unambiguous, Ambiguous };

struct FrameClass {
    FrameTag tag;
    uint32_t fired_rows;
    uint32_t fired_cols;
};

/// T readout frames stored as flat packed masks, plus the hidden incidence
/// frames when the simulator was asked to keep them.
class FrameBatch {
public:
    FrameBatch(uint32_t rows, uint32_t cols, uint64_t frame_count, bool with_truth);

    uint32_t rows() const { return rows_; }
    uint32_t cols() const { return cols_; }
    uint64_t size() const { return count_; }
    bool has_truth() const { return has_truth_; }

    size_t row_mask_words() const { return row_words_per_frame_; }
    size_t col_mask_words() const { return col_words_per_frame_; }
    size_t truth_words() const { return truth_words_per_frame_; }

    std::span<const uint64_t> row_mask(uint64_t t) const {
        return {row_data_.data() + t * row_words_per_frame_, row_words_per_frame_};
    }
    std::span<const uint64_t> col_mask(uint64_t t) const {
        return {col_data_.data() + t * col_words_per_frame_, col_words_per_frame_};
    }
    std::span<const uint64_t> truth_bits(uint64_t t) const {
        require_truth();
        return {truth_data_.data() + t * truth_words_per_frame_, truth_words_per_frame_};
    }

    std::span<uint64_t> row_mask(uint64_t t) {
        return {row_data_.data() + t * row_words_per_frame_, row_words_per_frame_};
    }
    std::span<uint64_t> col_mask(uint64_t t) {
        return {col_data_.data() + t * col_words_per_frame_, col_words_per_frame_};
    }
    std::span<uint64_t> truth_bits(uint64_t t) {
        require_truth();
        return {truth_data_.data() + t * truth_words_per_frame_, truth_words_per_frame_};
    }

    ReadoutFrame frame(uint64_t t) const;
    IncidenceFrame truth_frame(uint64_t t) const;

    void drop_truth();

    friend bool operator==(const FrameBatch&, const FrameBatch&) = default;

private:
    void require_truth() const {
        if (!has_truth_) throw std::logic_error("FrameBatch: truth was not retained");
    }

    uint32_t rows_;
    uint32_t cols_;
    uint64_t count_;
    size_t row_words_per_frame_;
    size_t col_words_per_frame_;
    size_t truth_words_per_frame_;
    bool has_truth_;
    std::vector<uint64_t> row_data_;
    std::vector<uint64_t> col_data_;
    std::vector<uint64_t> truth_data_;
};

}  // namespace rowcol
