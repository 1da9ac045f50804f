#pragma once

// Butterworth bandpass design as second-order sections and zero-phase
// (forward-backward) application, plus the three-band ICN filter bank.

#include "szbp/core.hpp"

#include <array>
#include <complex>
#include <span>
#include <vector>

namespace szbp::dsp {

struct BandSpec {
    double f_lo = 0.0;
    double f_hi = 0.0;
    int order = 6;  ///< analog prototype order; the cascade holds `order` biquads

    bool operator==(const BandSpec&) const = default;
};

inline constexpr BandSpec kLowBand{0.01, 0.3, 6};
inline constexpr BandSpec kMidBand{0.3, 0.7, 6};
inline constexpr BandSpec kHighBand{0.7, 0.99, 6};
inline constexpr std::array<BandSpec, 3> kDefaultBands{kLowBand, kMidBand, kHighBand};

/// One biquad, a0 normalized to 1:
///   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

    std::complex<double> response(double omega) const;
    /// Pole moduli of the section.
    std::array<double, 2> pole_radii() const;
};

struct IirFilter {
    std::vector<Biquad> sections;
    BandSpec spec;
    double fs = 2.0;

    /// Cascade frequency response at f_hz.
    std::complex<double> response(double f_hz) const;
    double magnitude(double f_hz) const { return std::abs(response(f_hz)); }
    /// Samples of odd extension used per side by apply_zero_phase.
    std::size_t pad_length() const { return 3 * static_cast<std::size_t>(spec.order); }
};

/// Throws ConfigError unless 0 < f_lo < f_hi < fs/2 and order is even and >= 2.
void validate_band(const BandSpec& spec, double fs);

/// Analog Butterworth prototype -> lowpass-to-bandpass -> bilinear transform
/// with prewarped edges. Each section is scaled to unit gain at the digital
/// band center, so the cascade has |H| = 1 there and 1/sqrt(2) at both edges.
IirFilter design_butterworth_bandpass(const BandSpec& spec, double fs);

/// Single causal pass through the cascade from rest.
std::vector<double> filter_causal(const IirFilter& filter, std::span<const double> x);

/// Forward-backward filtering with odd edge extension of pad_length()
/// samples per side and step-steady-state initial conditions.
std::vector<double> apply_zero_phase(const IirFilter& filter, std::span<const double> x);

/// One output matrix per band, each channel filtered independently over its
/// unpadded samples; zero padding stays zero.
std::vector<IcnMatrix> filter_bank(const IcnMatrix& icn, std::span<const BandSpec> bands);

}  // namespace szbp::dsp
