#pragma once

// Tukey-windowed STFT power spectrograms, Morlet CWT scalograms and the
// per-subject frequency x time x channel stack.

#include "szbp/core.hpp"

#include <span>
#include <string>
#include <vector>

namespace szbp::timefreq {

struct StftConfig {
    std::size_t window_len = 22;
    double tukey_alpha = 0.25;
    std::size_t hop = 21;

    std::size_t bins() const { return window_len / 2 + 1; }
    std::size_t frames(std::size_t signal_len) const { return (signal_len - window_len) / hop + 1; }
    bool operator==(const StftConfig&) const = default;
};

struct CwtConfig {
    std::vector<double> scales = default_scales();
    double omega0 = 5.0;

    static std::vector<double> default_scales();  // 1, 2, ..., 49
    bool operator==(const CwtConfig&) const = default;
};

enum class TensorKind { Spectrogram, Scalogram };

std::string to_string(TensorKind k);
TensorKind parse_tensor_kind(const std::string& s);

/// Dense 3D array: axis0 frequency bin or scale, axis1 time, axis2 channel.
/// Stored with axis2 fastest so that one (f, t) fibre is contiguous.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t d0, std::size_t d1, std::size_t d2) : d0_(d0), d1_(d1), d2_(d2), data_(d0 * d1 * d2, 0.0) {}

    std::size_t dim0() const { return d0_; }
    std::size_t dim1() const { return d1_; }
    std::size_t dim2() const { return d2_; }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * d1_ + j) * d2_ + k]; }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * d1_ + j) * d2_ + k]; }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }

    /// Copy of the axis0 x axis1 slice at channel k.
    Matrix channel_slice(std::size_t k) const;

    bool operator==(const Tensor3&) const = default;

private:
    std::size_t d0_ = 0, d1_ = 0, d2_ = 0;
    std::vector<double> data_;
};

struct SubjectTensor {
    Tensor3 data;
    TensorKind kind = TensorKind::Spectrogram;
    StftConfig stft;
    CwtConfig cwt;
};

/// Symmetric Tukey (tapered cosine) window. alpha = 0 is rectangular, 1 is Hann.
std::vector<double> tukey_window(std::size_t length, double alpha);

/// One-sided power spectrogram |DFT(w * frame)|^2, shape bins x frames.
/// Frames start at 0, hop, 2*hop, ...; no boundary extension.
Matrix stft_power_spectrogram(std::span<const double> signal, const StftConfig& cfg);

/// |CWT| with the complex Morlet wavelet, L2-normalized per scale (scales in
/// samples), support truncated at |u| <= 4, zero outside the signal.
/// Shape scales x signal length. fs only validates the configuration.
Matrix cwt_scalogram(std::span<const double> signal, const CwtConfig& cfg, double fs);

/// Scale (in samples) at which the Morlet centre frequency equals f_hz.
double morlet_scale_for(double f_hz, double omega0, double fs);

/// Applies the per-channel transform to every channel and stacks along axis2.
SubjectTensor stack_subject_tensor(const IcnMatrix& icn, TensorKind kind, const StftConfig& stft,
                                   const CwtConfig& cwt);

/// Averages adjacent pairs along axis1 (floor(T/2) output frames).
Tensor3 downsample_time(const Tensor3& t);

}  // namespace szbp::timefreq
