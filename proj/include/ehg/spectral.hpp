#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ehg {

struct PowerSpectrum {
  std::vector<double> freqs_hz;
  std::vector<double> psd;  // one-sided density, power per Hz
  double resolution_hz = 0.0;
  std::size_t n_segments = 0;
  bool single_periodogram_fallback = false;  // input shorter than one Welch segment
};

struct WelchOptions {
  std::size_t seg_len = 256;
  double overlap = 0.5;
};

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n);

/// Welch estimate with a periodic Hann window and per-segment mean removal.
/// Density scaling: summing psd * resolution over a unit sinusoid gives 0.5.
PowerSpectrum welch_psd(std::span<const double> signal, double fs, const WelchOptions& options = {});

/// Largest bin of the spectrum normalized to unit total power within [f_low, f_high].
/// Throws UndefinedFeatureError when the band carries no power.
double peak_amplitude(const PowerSpectrum& ps, double f_low, double f_high);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filters with centers equally spaced on the Mel axis between fmin and fmax.
struct MelFilterbank {
  std::size_t n_filters = 0;
  std::size_t n_fft = 0;
  double sampling_rate_hz = 0.0;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;
  std::vector<double> edges_hz;             // n_filters + 2 points
  std::vector<std::vector<double>> weights;  // n_filters x (n_fft / 2 + 1)
};

MelFilterbank make_mel_filterbank(std::size_t n_filters, std::size_t n_fft, double fs,
                                  double fmin_hz, double fmax_hz);

/// Shared filterbank spanning 0..fs/2, built once per (n_filters, n_fft, fs).
std::shared_ptr<const MelFilterbank> cached_mel_filterbank(std::size_t n_filters, std::size_t n_fft,
                                                           double fs);

/// Orthonormal DCT-II.
std::vector<double> dct2_orthonormal(std::span<const double> v);

struct MfccOptions {
  std::size_t n_coeffs = 20;
  std::size_t frame = 256;
  std::size_t hop = 128;
  std::size_t n_filters = 26;
  double power_floor = 1e-10;
};

struct MfccResult {
  std::vector<double> coeffs;
  std::size_t n_frames = 0;
  bool zero_padded = false;  // input shorter than one frame
};

/// Frame-averaged MFCCs: Hann frames -> |FFT|^2 -> Mel energies -> ln(max(E, floor)) -> DCT-II,
/// keeping coefficients 0..n_coeffs-1.
MfccResult mfcc(std::span<const double> signal, double fs, const MfccOptions& options = {});

}  // namespace ehg
