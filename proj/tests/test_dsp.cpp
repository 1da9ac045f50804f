#include "support.hpp"
#include "szbp/dsp.hpp"

#include <doctest.h>

#include <algorithm>

using namespace szbp;
using namespace szbp::dsp;
using szbp::testing::sine;

namespace {

// Single-pass magnitudes from scipy.signal.butter(6, band, 'bandpass', fs=2, output='sos').
struct Probe {
    double f, mag;
};

void check_oracle(const BandSpec& band, std::initializer_list<Probe> probes, double rel) {
    const auto f = design_butterworth_bandpass(band, 2.0);
    for (const auto& p : probes) {
        CAPTURE(p.f);
        CHECK(f.magnitude(p.f) == doctest::Approx(p.mag).epsilon(rel));
    }
}

double warped_prototype_gain_sq(const IirFilter& f, double f_hz) {
    const double wl = std::tan(std::numbers::pi * f.spec.f_lo / f.fs);
    const double wh = std::tan(std::numbers::pi * f.spec.f_hi / f.fs);
    const double w = std::tan(std::numbers::pi * f_hz / f.fs);
    const double omega = (w * w - wl * wh) / (w * (wh - wl));
    return 1.0 / (1.0 + std::pow(omega * omega, f.spec.order));
}

}  // namespace

TEST_SUITE("dsp") {
    TEST_CASE("mid band matches the scipy magnitude oracle") {
        check_oracle(kMidBand,
                     {{0.05, 2.3218883367620741e-06},
                      {0.2, 2.1628723211994244e-02},
                      {0.3, 0.70710678118654768},
                      {0.458, 0.99999999930976813},
                      {0.6, 0.99996800153591758},
                      {0.7, 0.70710678118654646},
                      {0.8, 2.1628723211994248e-02},
                      {0.9, 1.7307026912022472e-04}},
                     1e-7);
    }

    TEST_CASE("low and high bands match the scipy magnitude oracle") {
        check_oracle(kLowBand,
                     {{0.005, 1.3557388760319013e-02},
                      {0.01, 0.70710678118673909},
                      {0.15, 0.99998550442879941},
                      {0.3, 0.70710678118654635},
                      {0.5, 1.5215382077168781e-02},
                      {0.9, 2.2918718154521567e-07}},
                     1e-6);
        check_oracle(kHighBand, {{0.5, 0.01521538}, {0.7, 0.70710678}, {0.85, 0.9999855}, {0.99, 0.70710678}}, 1e-6);
    }

    TEST_CASE("mid band: unit gain at the geometric centre, -3 dB at the edges") {
        const auto f = design_butterworth_bandpass({0.3, 0.7, 6}, 2.0);
        CHECK(f.sections.size() == 6);
        const double centre = f.magnitude(std::sqrt(0.3 * 0.7));
        CHECK(centre >= 0.95);
        CHECK(centre <= 1.05);
        CHECK(f.magnitude(0.3) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
        CHECK(f.magnitude(0.7) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
    }

    TEST_CASE("low band attenuates 0.9 Hz below 0.01") {
        CHECK(design_butterworth_bandpass({0.01, 0.3, 6}, 2.0).magnitude(0.9) < 0.01);
    }

    TEST_CASE("invalid bands are rejected") {
        CHECK_THROWS_AS(design_butterworth_bandpass({0.7, 1.2, 6}, 2.0), ConfigError);
        CHECK_THROWS_AS(design_butterworth_bandpass({0.0, 0.3, 6}, 2.0), ConfigError);
        CHECK_THROWS_AS(design_butterworth_bandpass({0.5, 0.3, 6}, 2.0), ConfigError);
        CHECK_THROWS_AS(design_butterworth_bandpass({0.1, 0.3, 5}, 2.0), ConfigError);
        CHECK_THROWS_AS(design_butterworth_bandpass({0.1, 0.3, 0}, 2.0), ConfigError);
        try {
            design_butterworth_bandpass({0.7, 0.99999, 6}, 2.0);
            FAIL("expected an error");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("margin") != std::string::npos);
        }
    }

    TEST_CASE("property: every designed section is stable") {
        Rng rng(21);
        for (int trial = 0; trial < 300; ++trial) {
            const double fs = 0.5 + 4.0 * rng.uniform();
            const double nyq = fs / 2;
            double a = nyq * (0.002 + 0.99 * rng.uniform()), b = nyq * (0.002 + 0.99 * rng.uniform());
            if (a > b) std::swap(a, b);
            if (b - a < 1e-3 * nyq) continue;
            const int order = 2 * (1 + static_cast<int>(rng.below(4)));
            const auto f = design_butterworth_bandpass({a, b, order}, fs);
            for (const auto& s : f.sections)
                for (double r : s.pole_radii()) CHECK(r < 1.0);
        }
    }

    TEST_CASE("property: cascade obeys the warped Butterworth magnitude law") {
        for (const auto& band : kDefaultBands) {
            const auto f = design_butterworth_bandpass(band, 2.0);
            for (int k = 1; k <= 10; ++k) {
                const double fz = 0.98 * k / 10.0;
                CAPTURE(fz);
                CHECK(std::norm(f.response(fz)) == doctest::Approx(warped_prototype_gain_sq(f, fz)).epsilon(1e-6));
            }
        }
    }

    TEST_CASE("zero-phase: mid band passes 0.5 Hz with amplitude and phase intact") {
        const auto f = design_butterworth_bandpass(kMidBand, 2.0);
        const auto x = sine(234, 0.5, 2.0);
        const auto y = apply_zero_phase(f, x);
        REQUIRE(y.size() == x.size());
        // Least-squares fit y ~ a sin + b cos over the central half.
        double ss = 0, cc = 0, sc = 0, ys = 0, yc = 0;
        for (std::size_t t = 58; t < 175; ++t) {
            const double s = std::sin(std::numbers::pi * 0.5 * t), c = std::cos(std::numbers::pi * 0.5 * t);
            ss += s * s, cc += c * c, sc += s * c, ys += y[t] * s, yc += y[t] * c;
        }
        const double det = ss * cc - sc * sc;
        const double a = (ys * cc - yc * sc) / det, b = (yc * ss - ys * sc) / det;
        CHECK(std::hypot(a, b) >= 0.9);
        CHECK(std::abs(std::atan2(b, a)) < 1e-2);
    }

    TEST_CASE("zero-phase: zeros in, zeros out") {
        const auto f = design_butterworth_bandpass(kLowBand, 2.0);
        const std::vector<double> z(100, 0.0);
        CHECK(apply_zero_phase(f, z) == z);
    }

    TEST_CASE("zero-phase: high band rejects a 0.05 Hz sine") {
        const auto f = design_butterworth_bandpass(kHighBand, 2.0);
        const auto x = sine(234, 0.05, 2.0);
        const auto y = apply_zero_phase(f, x);
        CHECK(testing::rms(y, 58, 175) < 0.02 * testing::rms(x, 58, 175));
    }

    TEST_CASE("zero-phase: signal must exceed the edge padding") {
        const auto f = design_butterworth_bandpass(kMidBand, 2.0);
        CHECK_THROWS_AS(apply_zero_phase(f, std::vector<double>(18, 1.0)), DataError);
        CHECK_NOTHROW(apply_zero_phase(f, std::vector<double>(19, 1.0)));
    }

    TEST_CASE("property: zero-phase output is linear") {
        Rng rng(5);
        const auto f = design_butterworth_bandpass(kMidBand, 2.0);
        for (int trial = 0; trial < 10; ++trial) {
            const auto x = testing::normals(234, rng), y = testing::normals(234, rng);
            const double a = rng.normal(), b = rng.normal();
            std::vector<double> mix(234);
            for (std::size_t t = 0; t < 234; ++t) mix[t] = a * x[t] + b * y[t];
            const auto fx = apply_zero_phase(f, x), fy = apply_zero_phase(f, y), fm = apply_zero_phase(f, mix);
            double scale = 0.0, err = 0.0;
            for (std::size_t t = 0; t < 234; ++t) {
                scale = std::max(scale, std::abs(fm[t]));
                err = std::max(err, std::abs(fm[t] - (a * fx[t] + b * fy[t])));
            }
            CHECK(err <= 1e-9 * scale);
        }
    }

    TEST_CASE("property: in-band sinusoids come out with zero lag") {
        Rng rng(8);
        for (const auto& band : kDefaultBands) {
            const auto f = design_butterworth_bandpass(band, 2.0);
            for (int trial = 0; trial < 5; ++trial) {
                const double centre = std::sqrt(band.f_lo * band.f_hi);
                const double fz = centre * (0.9 + 0.2 * rng.uniform());
                const auto x = sine(512, fz, 2.0, 1.0, 6.28 * rng.uniform());
                const auto y = apply_zero_phase(f, x);
                int best_lag = 99;
                double best = -1e300;
                for (int lag = -8; lag <= 8; ++lag) {
                    double c = 0.0;
                    for (int t = 128; t < 384; ++t) c += x[static_cast<std::size_t>(t)] * y[static_cast<std::size_t>(t + lag)];
                    if (c > best) best = c, best_lag = lag;
                }
                CAPTURE(fz);
                CHECK(best_lag == 0);
            }
        }
    }

    TEST_CASE("filter_bank: three default bands keep the subject shape") {
        Rng rng(1);
        const auto icn = make_icn(testing::random_matrix(kIcnChannels, 234, rng), 2.0);
        const auto out = filter_bank(icn, kDefaultBands);
        REQUIRE(out.size() == 3);
        for (const auto& m : out) {
            CHECK(m.channels() == 105);
            CHECK(m.length() == 234);
        }
    }

    TEST_CASE("filter_bank: single band equals per-channel zero-phase filtering") {
        Rng rng(2);
        const auto icn = make_icn(testing::random_matrix(kIcnChannels, 234, rng), 2.0);
        const std::array<BandSpec, 1> one{kMidBand};
        const auto out = filter_bank(icn, one);
        const auto f = design_butterworth_bandpass(kMidBand, 2.0);
        for (std::size_t c = 0; c < kIcnChannels; ++c) {
            const auto ref = apply_zero_phase(f, icn.data.row(c));
            CHECK(std::equal(ref.begin(), ref.end(), out[0].data.row(c).begin()));
        }
    }

    TEST_CASE("filter_bank: a 0.15 Hz tone stays in the low band") {
        Rng rng(3);
        Matrix m = testing::random_matrix(kIcnChannels, 234, rng);
        for (double& v : m.values()) v *= 0.05;
        const auto tone = sine(234, 0.15, 2.0);
        for (std::size_t t = 0; t < 234; ++t) m(3, t) += tone[t];
        const auto icn = make_icn(m, 2.0);
        const auto out = filter_bank(icn, kDefaultBands);
        const double p_in = testing::power_at(icn.data.row(3), 0.15, 2.0);
        CHECK(testing::power_at(out[0].data.row(3), 0.15, 2.0) >= 0.8 * p_in);
        CHECK(testing::power_at(out[1].data.row(3), 0.15, 2.0) < 0.05 * p_in);
        CHECK(testing::power_at(out[2].data.row(3), 0.15, 2.0) < 0.05 * p_in);
    }

    TEST_CASE("filter_bank: zero padding stays zero") {
        Rng rng(4);
        auto icn = make_icn(testing::random_matrix(4, 200, rng), 2.0);
        Matrix padded(4, 234, 0.0);
        for (std::size_t c = 0; c < 4; ++c) std::ranges::copy(icn.data.row(c), padded.row(c).begin());
        icn.data = padded;
        for (const auto& m : filter_bank(icn, kDefaultBands))
            for (std::size_t c = 0; c < 4; ++c)
                for (std::size_t t = 200; t < 234; ++t) CHECK(m.data(c, t) == 0.0);
    }
}
