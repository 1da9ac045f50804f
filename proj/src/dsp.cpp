#include "szbp/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace szbp::dsp {

namespace {

using cplx = std::complex<double>;

// Fraction of Nyquist above which the prewarped edge tan(pi f/fs) blows up.
constexpr double kNyquistMargin = 1e-3;

Biquad section_from_poles(cplx z1, cplx z2, double omega_center) {
    Biquad s;
    s.b0 = 1.0;
    s.b1 = 0.0;
    s.b2 = -1.0;
    s.a1 = -(z1 + z2).real();
    s.a2 = (z1 * z2).real();
    const double g = std::abs(s.response(omega_center));
    s.b0 /= g;
    s.b2 /= g;
    return s;
}

struct SectionState {
    double z1 = 0.0;
    double z2 = 0.0;
};

// Direct form II transposed, in place.
void run_cascade(const std::vector<Biquad>& sections, std::vector<SectionState> state,
                 std::vector<double>& x) {
    for (std::size_t k = 0; k < sections.size(); ++k) {
        const Biquad& s = sections[k];
        double z1 = state[k].z1, z2 = state[k].z2;
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

// State each section would hold after an infinitely long step of height x0.
std::vector<SectionState> step_steady_state(const std::vector<Biquad>& sections, double x0) {
    std::vector<SectionState> st(sections.size());
    double u = x0;
    for (std::size_t k = 0; k < sections.size(); ++k) {
        const Biquad& s = sections[k];
        const double g = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        const double y = g * u;
        st[k].z2 = s.b2 * u - s.a2 * y;
        st[k].z1 = s.b1 * u - s.a1 * y + st[k].z2;
        u = y;
    }
    return st;
}

}  // namespace

std::complex<double> Biquad::response(double omega) const {
    const cplx e1 = std::polar(1.0, -omega);
    const cplx e2 = e1 * e1;
    return (b0 + b1 * e1 + b2 * e2) / (1.0 + a1 * e1 + a2 * e2);
}

std::array<double, 2> Biquad::pole_radii() const {
    const cplx disc = std::sqrt(cplx(a1 * a1 - 4.0 * a2, 0.0));
    return {std::abs((-a1 + disc) / 2.0), std::abs((-a1 - disc) / 2.0)};
}

std::complex<double> IirFilter::response(double f_hz) const {
    const double omega = 2.0 * std::numbers::pi * f_hz / fs;
    cplx h = 1.0;
    for (const auto& s : sections) h *= s.response(omega);
    return h;
}

void validate_band(const BandSpec& spec, double fs) {
    if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
    if (spec.order < 2 || spec.order % 2 != 0)
        throw ConfigError("filter order must be even and >= 2, got " + std::to_string(spec.order));
    const double nyq = fs / 2.0;
    if (!(spec.f_lo > 0.0) || !(spec.f_lo < spec.f_hi) || !(spec.f_hi < nyq)) {
        std::ostringstream os;
        os << "band edges must satisfy 0 < f_lo < f_hi < fs/2 = " << nyq << " Hz, got (" << spec.f_lo
           << ", " << spec.f_hi << ")";
        throw ConfigError(os.str());
    }
    if (spec.f_hi > nyq * (1.0 - kNyquistMargin)) {
        std::ostringstream os;
        os << "f_hi = " << spec.f_hi << " Hz is within " << (nyq - spec.f_hi) << " Hz of Nyquist; need margin >= "
           << nyq * kNyquistMargin << " Hz";
        throw ConfigError(os.str());
    }
}

IirFilter design_butterworth_bandpass(const BandSpec& spec, double fs) {
    validate_band(spec, fs);
    const double pi = std::numbers::pi;
    const int n = spec.order;

    const double w_lo = std::tan(pi * spec.f_lo / fs);
    const double w_hi = std::tan(pi * spec.f_hi / fs);
    const double w0_sq = w_lo * w_hi;
    const double bw = w_hi - w_lo;
    const double omega_center = 2.0 * std::atan(std::sqrt(w0_sq));

    auto bilinear = [](cplx s) { return (1.0 + s) / (1.0 - s); };

    IirFilter f;
    f.spec = spec;
    f.fs = fs;
    // Upper-half-plane prototype poles; each maps to two bandpass poles whose
    // conjugates come from the mirrored prototype pole.
    for (int k = 1; k <= n; ++k) {
        const cplx p = std::polar(1.0, pi * (2.0 * k + n - 1) / (2.0 * n));
        if (p.imag() <= 0.0) continue;
        const cplx pb = p * bw;
        const cplx root = std::sqrt(pb * pb - 4.0 * w0_sq);
        const cplx z_a = bilinear((pb + root) / 2.0);
        const cplx z_b = bilinear((pb - root) / 2.0);
        f.sections.push_back(section_from_poles(z_a, std::conj(z_a), omega_center));
        f.sections.push_back(section_from_poles(z_b, std::conj(z_b), omega_center));
    }
    for (const auto& s : f.sections)
        for (double r : s.pole_radii())
            if (!(r < 1.0)) throw NumericError("unstable section in bandpass design (pole radius >= 1)");
    return f;
}

std::vector<double> filter_causal(const IirFilter& filter, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    run_cascade(filter.sections, std::vector<SectionState>(filter.sections.size()), y);
    return y;
}

std::vector<double> apply_zero_phase(const IirFilter& filter, std::span<const double> x) {
    const std::size_t pad = filter.pad_length();
    const std::size_t n = x.size();
    if (n <= pad)
        throw DataError("signal of " + std::to_string(n) + " samples is too short for zero-phase filtering (need > " +
                        std::to_string(pad) + ")");

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    run_cascade(filter.sections, step_steady_state(filter.sections, ext.front()), ext);
    std::reverse(ext.begin(), ext.end());
    run_cascade(filter.sections, step_steady_state(filter.sections, ext.front()), ext);
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<IcnMatrix> filter_bank(const IcnMatrix& icn, std::span<const BandSpec> bands) {
    std::vector<IcnMatrix> out;
    out.reserve(bands.size());
    const std::size_t len = icn.original_length;
    for (const auto& band : bands) {
        const IirFilter filter = design_butterworth_bandpass(band, icn.fs);
        IcnMatrix res = icn;
        for (std::size_t c = 0; c < icn.channels(); ++c) {
            const auto row = icn.data.row(c).first(len);
            const auto y = apply_zero_phase(filter, row);
            std::copy(y.begin(), y.end(), res.data.row(c).begin());
        }
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace szbp::dsp
