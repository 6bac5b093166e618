// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#include "rowcol/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rowcol {

namespace fs = std::filesystem;

ImageFormat image_format_from_path(const fs::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".pgm") return ImageFormat::Pgm;
    if (ext == ".csv") return ImageFormat::Csv;
    throw std::invalid_argument("unrecognized image extension: " + path.string());
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

// PNM header tokens: whitespace-separated, '#' starts a comment to end of line.
class PnmScanner {
public:
    explicit PnmScanner(const std::string& data) : data_(data) {}

    std::string token() {
        skip();
        const size_t start = pos_;
        while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
            ++pos_;
        }
        if (start == pos_) throw std::runtime_error("PGM: truncated header");
        return data_.substr(start, pos_ - start);
    }

    uint32_t number() {
        const std::string t = token();
        uint32_t v = 0;
        const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || ptr != t.data() + t.size()) {
            throw std::runtime_error("PGM: malformed header number '" + t + "'");
        }
        return v;
    }

    /// Position just past the single whitespace byte that ends the header.
    size_t raster_offset() {
        if (pos_ >= data_.size()) throw std::runtime_error("PGM: missing raster");
        ++pos_;
        return pos_;
    }

    void skip() {
        while (pos_ < data_.size()) {
            const char c = data_[pos_];
            if (c == '#') {
                while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

private:
    const std::string& data_;
    size_t pos_ = 0;
};

FluxImage parse_pgm(const std::string& data) {
    PnmScanner scan(data);
    const std::string magic = scan.token();
    if (magic != "P5" && magic != "P2") {
        throw std::runtime_error("PGM: expected P5 or P2, got '" + magic + "'");
    }
    const uint32_t width = scan.number();
    const uint32_t height = scan.number();
    const uint32_t maxval = scan.number();
    if (width == 0 || height == 0) throw std::runtime_error("PGM: empty image");
    if (maxval == 0 || maxval > 65535) throw std::runtime_error("PGM: bad maxval");

    Matrix<double> m(height, width);
    const double scale = 1.0 / static_cast<double>(maxval);
    const size_t count = static_cast<size_t>(width) * height;

    if (magic == "P2") {
        for (size_t p = 0; p < count; ++p) {
            const uint32_t v = scan.number();
            if (v > maxval) throw std::runtime_error("PGM: sample exceeds maxval");
            m.values()[p] = v * scale;
        }
    } else {
        const size_t offset = scan.raster_offset();
        const size_t bytes_per = maxval > 255 ? 2 : 1;
        if (data.size() - offset < count * bytes_per) {
            throw std::runtime_error("PGM: truncated raster");
        }
        const unsigned char* raw =
            reinterpret_cast<const unsigned char*>(data.data()) + offset;
        for (size_t p = 0; p < count; ++p) {
            uint32_t v;
            if (bytes_per == 2) {
                v = (static_cast<uint32_t>(raw[2 * p]) << 8) | raw[2 * p + 1];
            } else {
                v = raw[p];
            }
            if (v > maxval) throw std::runtime_error("PGM: sample exceeds maxval");
            m.values()[p] = v * scale;
        }
    }
    return FluxImage(std::move(m));
}

FluxImage parse_csv(const std::string& data) {
    std::vector<double> values;
    uint32_t rows = 0;
    size_t cols = 0;
    std::istringstream in(data);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t line_cols = 0;
        size_t pos = 0;
        while (pos <= line.size()) {
            size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            std::string_view field(line.data() + pos, comma - pos);
            while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
            while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw std::runtime_error("CSV: malformed number '" + std::string(field) + "'");
            }
            values.push_back(v);
            ++line_cols;
            pos = comma + 1;
            if (comma == line.size()) break;
        }
        if (rows == 0) {
            cols = line_cols;
        } else if (line_cols != cols) {
            throw std::runtime_error("CSV: ragged rows");
        }
        ++rows;
    }
    if (rows == 0) throw std::runtime_error("CSV: no data");
    return FluxImage(
        Matrix<double>::from_values(rows, static_cast<uint32_t>(cols), std::move(values)));
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::logic_error("format_double: to_chars failed");
    return std::string(buf, ptr);
}

}  // namespace

FluxImage load_flux_image(const fs::path& path, ImageFormat format) {
    const std::string data = read_file(path);
    switch (format) {
        case ImageFormat::Pgm: return parse_pgm(data);
        case ImageFormat::Csv: return parse_csv(data);
    }
    throw std::logic_error("load_flux_image: bad format");
}

FluxImage load_flux_image(const fs::path& path) {
    return load_flux_image(path, image_format_from_path(path));
}

void atomic_write(const fs::path& path, const void* data, size_t size) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void save_flux_image(const FluxImage& image, const fs::path& path, ImageFormat format,
                     double peak) {
    std::string out;
    if (format == ImageFormat::Csv) {
        std::ostringstream ss;
        for (uint32_t i = 0; i < image.rows(); ++i) {
            for (uint32_t j = 0; j < image.cols(); ++j) {
                if (j) ss << ',';
                ss << format_double(image(i, j));
            }
            ss << '\n';
        }
        out = std::move(ss).str();
    } else {
        if (peak <= 0.0) {
            peak = *std::max_element(image.values().values().begin(),
                                     image.values().values().end());
            if (peak <= 0.0) peak = 1.0;
        }
        std::ostringstream ss;
        ss << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
        out = std::move(ss).str();
        out.reserve(out.size() + image.values().size());
        for (double v : image.values().values()) {
            const double scaled = std::clamp(v / peak, 0.0, 1.0) * 255.0;
            out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
        }
    }
    atomic_write(path, out.data(), out.size());
}

void save_flux_image(const FluxImage& image, const fs::path& path) {
    save_flux_image(image, path, image_format_from_path(path));
}

namespace {

constexpr char kMagic[4] = {'R', 'C', 'F', 'B'};
constexpr uint16_t kVersion = 1;

void put_bytes(std::vector<uint8_t>& out, uint64_t value, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<uint8_t>(value >> (8 * i)));
}

uint64_t get_bytes(const std::vector<uint8_t>& in, size_t& pos, int n) {
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<uint64_t>(in[pos + i]) << (8 * i);
    pos += n;
    return v;
}

void pack_mask(std::vector<uint8_t>& out, std::span<const uint64_t> words, size_t nbytes) {
    for (size_t k = 0; k < nbytes; ++k) {
        out.push_back(static_cast<uint8_t>(words[k >> 3] >> (8 * (k & 7))));
    }
}

void unpack_mask(const std::vector<uint8_t>& in, size_t& pos, std::span<uint64_t> words,
                 size_t nbytes, uint64_t nbits) {
    std::fill(words.begin(), words.end(), 0);
    for (size_t k = 0; k < nbytes; ++k) {
        words[k >> 3] |= static_cast<uint64_t>(in[pos + k]) << (8 * (k & 7));
    }
    pos += nbytes;
    const uint32_t tail = nbits & 63;
    if (tail != 0) words[words.size() - 1] &= (uint64_t{1} << tail) - 1;
}

}  // namespace

std::vector<uint8_t> encode_batch_bytes(const FrameBatch& batch) {
    const size_t row_bytes = (batch.rows() + 7) / 8;
    const size_t col_bytes = (batch.cols() + 7) / 8;
    const size_t truth_bytes =
        (static_cast<size_t>(batch.rows()) * batch.cols() + 7) / 8;
    const size_t per_frame =
        row_bytes + col_bytes + (batch.has_truth() ? truth_bytes : 0);

    std::vector<uint8_t> out;
    out.reserve(23 + per_frame * batch.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    put_bytes(out, kVersion, 2);
    put_bytes(out, batch.rows(), 4);
    put_bytes(out, batch.cols(), 4);
    put_bytes(out, batch.size(), 8);
    out.push_back(batch.has_truth() ? 1 : 0);

    for (uint64_t t = 0; t < batch.size(); ++t) {
        pack_mask(out, batch.row_mask(t), row_bytes);
        pack_mask(out, batch.col_mask(t), col_bytes);
        if (batch.has_truth()) pack_mask(out, batch.truth_bits(t), truth_bytes);
    }
    return out;
}

FrameBatch decode_batch_bytes(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 23) throw std::runtime_error("RCFB: truncated header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw std::runtime_error("RCFB: bad magic");
    }
    size_t pos = 4;
    const uint16_t version = static_cast<uint16_t>(get_bytes(bytes, pos, 2));
    if (version != kVersion) {
        throw std::runtime_error("RCFB: unsupported version " + std::to_string(version));
    }
    const uint32_t rows = static_cast<uint32_t>(get_bytes(bytes, pos, 4));
    const uint32_t cols = static_cast<uint32_t>(get_bytes(bytes, pos, 4));
    const uint64_t count = get_bytes(bytes, pos, 8);
    const uint8_t truth_flag = bytes[pos++];
    if (rows == 0 || cols == 0) throw std::runtime_error("RCFB: zero dimensions");
    if (truth_flag > 1) throw std::runtime_error("RCFB: bad truth flag");
    if (count == 0) throw std::runtime_error("RCFB: empty batch");

    const size_t row_bytes = (rows + 7) / 8;
    const size_t col_bytes = (cols + 7) / 8;
    const size_t truth_bytes = (static_cast<size_t>(rows) * cols + 7) / 8;
    const size_t per_frame = row_bytes + col_bytes + (truth_flag ? truth_bytes : 0);
    if (bytes.size() - pos != per_frame * count) {
        throw std::runtime_error("RCFB: payload size mismatch");
    }

    FrameBatch batch(rows, cols, count, truth_flag != 0);
    for (uint64_t t = 0; t < count; ++t) {
        unpack_mask(bytes, pos, batch.row_mask(t), row_bytes, rows);
        unpack_mask(bytes, pos, batch.col_mask(t), col_bytes, cols);
        if (truth_flag) {
            unpack_mask(bytes, pos, batch.truth_bits(t), truth_bytes,
                        static_cast<uint64_t>(rows) * cols);
        }
    }
    return batch;
}

void encode_batch(const FrameBatch& batch, const fs::path& path) {
    const std::vector<uint8_t> bytes = encode_batch_bytes(batch);
    atomic_write(path, bytes.data(), bytes.size());
}

FrameBatch decode_batch(const fs::path& path) {
    const std::string data = read_file(path);
    std::vector<uint8_t> bytes(data.begin(), data.end());
    return decode_batch_bytes(bytes);
}

void ReportTable::add_row(std::vector<ReportCell> cells) {
    if (cells.size() != columns.size()) {
        throw std::invalid_argument("ReportTable: row width mismatch");
    }
    rows.push_back(std::move(cells));
}

std::string format_cell(const ReportCell& cell) {
    if (std::holds_alternative<int64_t>(cell)) {
        return std::to_string(std::get<int64_t>(cell));
    }
    if (std::holds_alternative<double>(cell)) {
        return format_double(std::get<double>(cell));
    }
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of("\t\n") != std::string::npos) {
        throw std::invalid_argument("ReportTable: cell contains separator characters");
    }
    return s;
}

std::string ReportTable::to_tsv() const {
    std::ostringstream ss;
    for (const auto& [key, value] : metadata) {
        ss << "# " << key << " = " << value << '\n';
    }
    for (size_t c = 0; c < columns.size(); ++c) {
        if (c) ss << '\t';
        ss << columns[c];
    }
    ss << '\n';
    for (const auto& row : rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c) ss << '\t';
            ss << format_cell(row[c]);
        }
        ss << '\n';
    }
    return std::move(ss).str();
}

void ReportTable::write(const fs::path& path) const {
    const std::string text = to_tsv();
    atomic_write(path, text.data(), text.size());
}

uint64_t config_hash(const std::string& canonical) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

FluxImage resolve_image(const std::string& spec) {
    // Dim pixels stay slightly bright so the 2x2 information matrix remains
    // interior; see the CRB driver.
    constexpr double kDim = 0.05;
    if (spec == "uniform2x2") {
        return FluxImage(Matrix<double>::from_values(2, 2, {1.0, 1.0, 1.0, 1.0}));
    }
    if (spec == "diag2x2") {
        return FluxImage(Matrix<double>::from_values(2, 2, {1.0, kDim, kDim, 1.0}));
    }
    if (spec == "tri2x2") {
        return FluxImage(Matrix<double>::from_values(2, 2, {1.0, 1.0, 1.0, kDim}));
    }
    return load_flux_image(spec);
}

Matrix<double> resample_image(const Matrix<double>& in, uint32_t rows, uint32_t cols) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("resample_image: dimensions must be positive");
    }
    Matrix<double> out(rows, cols);
    const double rs = static_cast<double>(in.rows()) / rows;
    const double cs = static_cast<double>(in.cols()) / cols;
    for (uint32_t i = 0; i < rows; ++i) {
        const double r0 = i * rs;
        const double r1 = (i + 1) * rs;
        for (uint32_t j = 0; j < cols; ++j) {
            const double c0 = j * cs;
            const double c1 = (j + 1) * cs;
            double sum = 0.0;
            for (uint32_t r = static_cast<uint32_t>(r0); r < in.rows() && r < r1; ++r) {
                const double rw = std::min<double>(r + 1, r1) - std::max<double>(r, r0);
                if (rw <= 0) continue;
                for (uint32_t c = static_cast<uint32_t>(c0); c < in.cols() && c < c1; ++c) {
                    const double cw = std::min<double>(c + 1, c1) - std::max<double>(c, c0);
                    if (cw <= 0) continue;
                    sum += rw * cw * in(r, c);
                }
            }
            out(i, j) = sum / (rs * cs);
        }
    }
    return out;
}

}  // namespace rowcol
