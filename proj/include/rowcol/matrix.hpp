// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rowcol {

/// Dense row-major matrix with value semantics.
template <class T>
class Matrix {
public:
    Matrix() = default;

    Matrix(uint32_t rows, uint32_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
        if (rows == 0 || cols == 0) {
            throw std::invalid_argument("Matrix: dimensions must be positive");
        }
    }

    static Matrix from_values(uint32_t rows, uint32_t cols, std::vector<T> values) {
        if (values.size() != static_cast<size_t>(rows) * cols) {
            throw std::invalid_argument("Matrix: value count does not match dimensions");
        }
        Matrix m(rows, cols);
        m.data_ = std::move(values);
        return m;
    }

    uint32_t rows() const { return rows_; }
    uint32_t cols() const { return cols_; }
    size_t size() const { return data_.size(); }

    T& operator()(uint32_t i, uint32_t j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
    const T& operator()(uint32_t i, uint32_t j) const {
        return data_[static_cast<size_t>(i) * cols_ + j];
    }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    uint32_t rows_ = 0;
    uint32_t cols_ = 0;
    std::vector<T> data_;
};

}  // namespace rowcol
