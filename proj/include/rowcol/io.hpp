// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "rowcol/types.hpp"

namespace rowcol {

enum class ImageFormat : uint8_t { Pgm, Csv };

/// Format from file extension (.pgm / .csv); throws otherwise.
ImageFormat image_format_from_path(const std::filesystem::path& path);

/// PGM gray levels map linearly to [0, 1] flux; CSV entries are raw
/// nonnegative reals.
FluxImage load_flux_image(const std::filesystem::path& path, ImageFormat format);
FluxImage load_flux_image(const std::filesystem::path& path);

/// CSV writes exact shortest-round-trip decimals. PGM scales [0, peak] to the
/// 16-bit gray range (peak = max entry when not given).
void save_flux_image(const FluxImage& image, const std::filesystem::path& path,
                     ImageFormat format, double peak = 0.0);
void save_flux_image(const FluxImage& image, const std::filesystem::path& path);

/// Bit-exact batch container, version 1:
///   magic "RCFB" | u16 version | u32 rows | u32 cols | u64 frames | u8 truth
/// then per frame ceil(rows/8) row-mask bytes, ceil(cols/8) col-mask bytes,
/// and (when truth = 1) ceil(rows*cols/8) row-major incidence bytes. All
/// integers little-endian; bits LSB-first within each byte.
void encode_batch(const FrameBatch& batch, const std::filesystem::path& path);
FrameBatch decode_batch(const std::filesystem::path& path);

std::vector<uint8_t> encode_batch_bytes(const FrameBatch& batch);
FrameBatch decode_batch_bytes(const std::vector<uint8_t>& bytes);

using ReportCell = std::variant<int64_t, double, std::string>;

/// Rectangular table with '#'-prefixed metadata lines, written as
/// tab-separated values. Numeric cells use shortest round-trip formatting.
struct ReportTable {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<ReportCell>> rows;

    void add_row(std::vector<ReportCell> cells);
    std::string to_tsv() const;
    void write(const std::filesystem::path& path) const;
};

std::string format_cell(const ReportCell& cell);

/// FNV-1a hash of a canonical config string; stamped into report metadata.
uint64_t config_hash(const std::string& canonical);

/// Write bytes to a temporary file in the target directory, then rename.
void atomic_write(const std::filesystem::path& path, const void* data, size_t size);

/// Built-in synthetic truths ("uniform2x2", "diag2x2", "tri2x2") or an image
/// file path.
FluxImage resolve_image(const std::string& spec);

/// Area-weighted resampling used by the array-size sweep.
Matrix<double> resample_image(const Matrix<double>& in, uint32_t rows, uint32_t cols);

}  // namespace rowcol
