// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/tally.hpp"

#include <stdexcept>

#include "rowcol/model.hpp"

namespace rowcol {

FrameTallies::FrameTallies(uint32_t rows_, uint32_t cols_)
    : rows(rows_), cols(cols_), single_counts(rows_, cols_, 0),
      unambiguous_hits(rows_, cols_, 0) {}

uint64_t FrameTallies::ambiguous_total() const {
    uint64_t sum = 0;
    for (const auto& [key, count] : ambiguous) sum += count;
    return sum;
}

void FrameTallies::merge(const FrameTallies& other) {
    if (rows != other.rows || cols != other.cols) {
        throw std::invalid_argument("FrameTallies::merge: dimension mismatch");
    }
    total += other.total;
    n_empty += other.n_empty;
    unambiguous_total += other.unambiguous_total;
    for (size_t i = 0; i < single_counts.size(); ++i) {
        single_counts.values()[i] += other.single_counts.values()[i];
        unambiguous_hits.values()[i] += other.unambiguous_hits.values()[i];
    }
    for (const auto& [key, count] : other.ambiguous) {
        ambiguous[key] += count;
    }
}

FrameTallies tally_frames(const FrameBatch& batch, uint64_t begin, uint64_t end) {
    FrameTallies t(batch.rows(), batch.cols());
    t.total = end - begin;
    const size_t rw = batch.row_mask_words();
    const size_t cw = batch.col_mask_words();

    for (uint64_t f = begin; f < end; ++f) {
        const auto row_mask = batch.row_mask(f);
        const auto col_mask = batch.col_mask(f);
        const FrameClass cls = classify_masks(row_mask, col_mask);

        switch (cls.tag) {
            case FrameTag::Empty:
                ++t.n_empty;
                ++t.unambiguous_total;
                break;
            case FrameTag::Unambiguous: {
                ++t.unambiguous_total;
                // The fired pixels are exactly fired-rows x fired-cols.
                for (size_t wi = 0; wi < rw; ++wi) {
                    uint64_t rbits = row_mask[wi];
                    while (rbits != 0) {
                        const uint32_t i =
                            static_cast<uint32_t>(wi * 64 + std::countr_zero(rbits));
                        rbits &= rbits - 1;
                        for (size_t wj = 0; wj < cw; ++wj) {
                            uint64_t cbits = col_mask[wj];
                            while (cbits != 0) {
                                const uint32_t j = static_cast<uint32_t>(
                                    wj * 64 + std::countr_zero(cbits));
                                cbits &= cbits - 1;
                                ++t.unambiguous_hits(i, j);
                                if (cls.fired_rows == 1 && cls.fired_cols == 1) {
                                    ++t.single_counts(i, j);
                                }
                            }
                        }
                    }
                }
                break;
            }
            case FrameTag::Ambiguous: {
                SignatureKey key;
                key.words.reserve(rw + cw);
                key.words.insert(key.words.end(), row_mask.begin(), row_mask.end());
                key.words.insert(key.words.end(), col_mask.begin(), col_mask.end());
                ++t.ambiguous[std::move(key)];
                break;
            }
        }
    }
    return t;
}

FrameTallies tally_frames(const FrameBatch& batch) {
    return tally_frames(batch, 0, batch.size());
}

}  // namespace rowcol
