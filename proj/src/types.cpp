// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/types.hpp"

#include <cmath>

#include "rowcol/model.hpp"

namespace rowcol {

FluxImage::FluxImage(Matrix<double> values) : values_(std::move(values)) {
    if (values_.size() == 0) {
        throw std::invalid_argument("FluxImage: empty matrix");
    }
    for (double v : values_.values()) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("FluxImage: entries must be finite and >= 0");
        }
    }
}

DetectionProbMap::DetectionProbMap(Matrix<double> values) : values_(std::move(values)) {
    if (values_.size() == 0) {
        throw std::invalid_argument("DetectionProbMap: empty matrix");
    }
    for (double v : values_.values()) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument("DetectionProbMap: entries must be in [0, 1]");
        }
    }
}

FrameBatch::FrameBatch(uint32_t rows, uint32_t cols, uint64_t frame_count, bool with_truth)
    : rows_(rows), cols_(cols), count_(frame_count),
      row_words_per_frame_(words_for_bits(rows)),
      col_words_per_frame_(words_for_bits(cols)),
      truth_words_per_frame_(words_for_bits(static_cast<uint64_t>(rows) * cols)),
      has_truth_(with_truth) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("FrameBatch: dimensions must be positive");
    }
    row_data_.resize(count_ * row_words_per_frame_, 0);
    col_data_.resize(count_ * col_words_per_frame_, 0);
    if (with_truth) {
        truth_data_.resize(count_ * truth_words_per_frame_, 0);
    }
}

ReadoutFrame FrameBatch::frame(uint64_t t) const {
    ReadoutFrame f{BitVec(rows_), BitVec(cols_)};
    const auto rm = row_mask(t);
    const auto cm = col_mask(t);
    std::copy(rm.begin(), rm.end(), f.row_mask.words().begin());
    std::copy(cm.begin(), cm.end(), f.col_mask.words().begin());
    return f;
}

IncidenceFrame FrameBatch::truth_frame(uint64_t t) const {
    return IncidenceFrame::from_words(rows_, cols_, truth_bits(t));
}

void FrameBatch::drop_truth() {
    truth_data_.clear();
    truth_data_.shrink_to_fit();
    has_truth_ = false;
}

}  // namespace rowcol
