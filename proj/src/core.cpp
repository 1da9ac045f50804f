#include "szbp/core.hpp"
#include "szbp/rng.hpp"

#include <cmath>
#include <numbers>

namespace szbp {

std::string to_string(Label l) { return l == Label::SZ ? "SZ" : "BP"; }

std::optional<Label> parse_label(const std::string& text) {
    if (text == "SZ") return Label::SZ;
    if (text == "BP") return Label::BP;
    if (text.empty()) return std::nullopt;
    throw DataError("unknown label '" + text + "' (expected SZ, BP or empty)");
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= rows_) throw std::out_of_range("Matrix::select_rows: row index out of range");
        auto src = row(idx[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> idx) const {
    Matrix out(rows_, idx.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t j = 0; j < idx.size(); ++j) {
            if (idx[j] >= cols_) throw std::out_of_range("Matrix::select_cols: column index out of range");
            out(r, j) = (*this)(r, idx[j]);
        }
    return out;
}

IcnMatrix make_icn(Matrix data, double fs) {
    if (!(fs > 0.0) || !std::isfinite(fs)) throw ConfigError("sampling rate must be positive");
    if (data.cols() < 2) throw DataError("ICN matrix needs at least 2 samples");
    for (double v : data.values())
        if (!std::isfinite(v)) throw DataError("ICN matrix contains a non-finite value");
    IcnMatrix icn;
    icn.original_length = data.cols();
    icn.data = std::move(data);
    icn.fs = fs;
    return icn;
}

std::vector<int> labels_of(const Dataset& ds) {
    std::vector<int> y;
    y.reserve(ds.size());
    for (const auto& s : ds.subjects) {
        if (!s.label) throw DataError("subject '" + s.subject_id + "' has no label");
        y.push_back(to_int(*s.label));
    }
    return y;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
}

}  // namespace szbp
