#include "szbp/timefreq.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace szbp::timefreq {

namespace {

constexpr double kMorletSupport = 4.0;

void validate(const StftConfig& cfg) {
    if (cfg.window_len < 1) throw ConfigError("STFT window length must be >= 1");
    if (cfg.hop < 1 || cfg.hop > cfg.window_len) throw ConfigError("STFT hop must be in [1, window_len]");
    if (!(cfg.tukey_alpha >= 0.0 && cfg.tukey_alpha <= 1.0)) throw ConfigError("Tukey alpha must be in [0, 1]");
}

void validate(const CwtConfig& cfg) {
    if (cfg.scales.empty()) throw ConfigError("CWT needs at least one scale");
    for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
        if (!(cfg.scales[i] > 0.0)) throw ConfigError("CWT scales must be positive");
        if (i > 0 && !(cfg.scales[i] > cfg.scales[i - 1])) throw ConfigError("CWT scales must be strictly increasing");
    }
    if (!(cfg.omega0 > 0.0)) throw ConfigError("Morlet omega0 must be positive");
}

}  // namespace

std::vector<double> CwtConfig::default_scales() {
    std::vector<double> s(49);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i + 1);
    return s;
}

std::string to_string(TensorKind k) { return k == TensorKind::Spectrogram ? "spectrogram" : "scalogram"; }

TensorKind parse_tensor_kind(const std::string& s) {
    if (s == "spectrogram") return TensorKind::Spectrogram;
    if (s == "scalogram") return TensorKind::Scalogram;
    throw ConfigError("unknown tensor kind '" + s + "'");
}

Matrix Tensor3::channel_slice(std::size_t k) const {
    Matrix m(d0_, d1_);
    for (std::size_t i = 0; i < d0_; ++i)
        for (std::size_t j = 0; j < d1_; ++j) m(i, j) = (*this)(i, j, k);
    return m;
}

std::vector<double> tukey_window(std::size_t length, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("Tukey alpha must be in [0, 1]");
    if (length < 1) throw ConfigError("window length must be >= 1");
    std::vector<double> w(length, 1.0);
    if (length == 1 || alpha == 0.0) return w;
    const double pi = std::numbers::pi;
    const double n1 = static_cast<double>(length - 1);
    for (std::size_t n = 0; n < length; ++n) {
        const double x = static_cast<double>(n) / n1;
        if (x < alpha / 2.0)
            w[n] = 0.5 * (1.0 - std::cos(2.0 * pi * x / alpha));
        else if (x > 1.0 - alpha / 2.0)
            w[n] = 0.5 * (1.0 - std::cos(2.0 * pi * (1.0 - x) / alpha));
    }
    // Exact mirror symmetry regardless of rounding in x.
    for (std::size_t n = 0; n < length / 2; ++n) w[length - 1 - n] = w[n];
    return w;
}

Matrix stft_power_spectrogram(std::span<const double> signal, const StftConfig& cfg) {
    validate(cfg);
    const std::size_t wl = cfg.window_len;
    if (signal.size() < wl)
        throw DataError("signal of " + std::to_string(signal.size()) + " samples is shorter than the STFT window (" +
                        std::to_string(wl) + ")");
    const auto window = tukey_window(wl, cfg.tukey_alpha);
    const std::size_t bins = cfg.bins();
    const std::size_t frames = cfg.frames(signal.size());

    // Twiddles indexed by (f * t) mod W keep the DFT exact for every bin.
    std::vector<double> cos_t(wl), sin_t(wl);
    for (std::size_t k = 0; k < wl; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(wl);
        cos_t[k] = std::cos(a);
        sin_t[k] = std::sin(a);
    }

    Matrix out(bins, frames);
    std::vector<double> frame(wl);
    for (std::size_t n = 0; n < frames; ++n) {
        const std::size_t start = n * cfg.hop;
        for (std::size_t t = 0; t < wl; ++t) frame[t] = window[t] * signal[start + t];
        for (std::size_t f = 0; f < bins; ++f) {
            double re = 0.0, im = 0.0;
            for (std::size_t t = 0; t < wl; ++t) {
                const std::size_t k = (f * t) % wl;
                re += frame[t] * cos_t[k];
                im -= frame[t] * sin_t[k];
            }
            out(f, n) = re * re + im * im;
        }
    }
    return out;
}

double morlet_scale_for(double f_hz, double omega0, double fs) {
    return omega0 * fs / (2.0 * std::numbers::pi * f_hz);
}

Matrix cwt_scalogram(std::span<const double> signal, const CwtConfig& cfg, double fs) {
    validate(cfg);
    if (!(fs > 0.0)) throw ConfigError("sampling rate must be positive");
    if (signal.empty()) throw DataError("CWT of an empty signal");
    const std::size_t len = signal.size();
    const auto n = static_cast<std::ptrdiff_t>(len);
    const double norm = std::pow(std::numbers::pi, -0.25);

    Matrix out(cfg.scales.size(), len);
    std::vector<double> re(len), im(len);
    for (std::size_t si = 0; si < cfg.scales.size(); ++si) {
        const double s = cfg.scales[si];
        const auto half = static_cast<std::ptrdiff_t>(std::floor(kMorletSupport * s));
        const double amp = norm / std::sqrt(s);
        std::fill(re.begin(), re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
        for (std::ptrdiff_t m = -half; m <= half; ++m) {
            // Coefficient of x[tau + m]: (1/sqrt(s)) * conj(psi(m / s)).
            const double u = static_cast<double>(m) / s;
            const double env = amp * std::exp(-0.5 * u * u);
            const double cr = env * std::cos(cfg.omega0 * u);
            const double ci = -env * std::sin(cfg.omega0 * u);
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -m);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - m);
            for (std::ptrdiff_t tau = lo; tau < hi; ++tau) {
                const double v = signal[static_cast<std::size_t>(tau + m)];
                re[static_cast<std::size_t>(tau)] += v * cr;
                im[static_cast<std::size_t>(tau)] += v * ci;
            }
        }
        auto row = out.row(si);
        for (std::size_t t = 0; t < len; ++t) row[t] = std::hypot(re[t], im[t]);
    }
    return out;
}

SubjectTensor stack_subject_tensor(const IcnMatrix& icn, TensorKind kind, const StftConfig& stft,
                                   const CwtConfig& cwt) {
    SubjectTensor st;
    st.kind = kind;
    st.stft = stft;
    st.cwt = cwt;
    const std::size_t channels = icn.channels();
    for (std::size_t c = 0; c < channels; ++c) {
        const Matrix m = kind == TensorKind::Spectrogram ? stft_power_spectrogram(icn.data.row(c), stft)
                                                         : cwt_scalogram(icn.data.row(c), cwt, icn.fs);
        if (c == 0) st.data = Tensor3(m.rows(), m.cols(), channels);
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t j = 0; j < m.cols(); ++j) st.data(i, j, c) = m(i, j);
    }
    return st;
}

Tensor3 downsample_time(const Tensor3& t) {
    Tensor3 out(t.dim0(), t.dim1() / 2, t.dim2());
    for (std::size_t i = 0; i < out.dim0(); ++i)
        for (std::size_t j = 0; j < out.dim1(); ++j)
            for (std::size_t k = 0; k < out.dim2(); ++k) out(i, j, k) = 0.5 * (t(i, 2 * j, k) + t(i, 2 * j + 1, k));
    return out;
}

}  // namespace szbp::timefreq
