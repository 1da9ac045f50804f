#pragma once

#include "szbp/core.hpp"
#include "szbp/rng.hpp"

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace szbp::testing {

inline std::vector<double> sine(std::size_t n, double f_hz, double fs, double amp = 1.0, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t)
        x[t] = amp * std::sin(2.0 * std::numbers::pi * f_hz * static_cast<double>(t) / fs + phase);
    return x;
}

inline std::vector<double> normals(std::size_t n, Rng& rng) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    return x;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.normal();
    return m;
}

/// O(n^2) pair counting.
inline double auc_pairs(std::span<const double> s, std::span<const int> y) {
    double num = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                pairs += 1.0;
                num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return num / pairs;
}

/// Periodogram power |sum x[t] e^{-i 2 pi f t / fs}|^2 over [t0, t1).
inline double power_at(std::span<const double> x, double f_hz, double fs, std::size_t t0 = 0,
                       std::size_t t1 = static_cast<std::size_t>(-1)) {
    t1 = std::min(t1, x.size());
    std::complex<double> acc = 0.0;
    for (std::size_t t = t0; t < t1; ++t)
        acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * f_hz * static_cast<double>(t) / fs);
    return std::norm(acc);
}

inline double rms(std::span<const double> x, std::size_t t0, std::size_t t1) {
    double s = 0.0;
    for (std::size_t t = t0; t < t1; ++t) s += x[t] * x[t];
    return std::sqrt(s / static_cast<double>(t1 - t0));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("szbp_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace szbp::testing
