#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ehg {

/// Daubechies-8 scaling (low-pass reconstruction) filter, 16 taps.
const std::array<double, 16>& db8_scaling_filter();

/// Quadrature-mirror high-pass partner: g[j] = (-1)^j h[15 - j].
std::array<double, 16> db8_wavelet_filter();

struct WaveletDecomposition {
  std::vector<std::vector<double>> details;  // D1 (finest) .. Dn
  std::vector<double> approximation;         // An
  std::size_t original_length = 0;
  std::size_t padded_length = 0;
};

/// Mallat cascade with periodization. Inputs whose length is not a multiple of
/// 2^levels are right-padded by periodic extension.
WaveletDecomposition dwt_db8(std::span<const double> signal, std::size_t levels = 5);

/// Inverse cascade; returns the first original_length samples.
std::vector<double> idwt_db8(const WaveletDecomposition& dec);

struct SubbandStats {
  double mean = 0.0;
  double variance = 0.0;
  double energy = 0.0;
  double absolute_sum = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;  // excess
};

inline constexpr std::size_t kStatsPerBand = 6;
inline constexpr std::array<std::string_view, kStatsPerBand> kSubbandStatNames = {
    "mean", "var", "energy", "abssum", "skew", "kurt"};

/// Population moments (divide by N). Skewness and kurtosis are 0 when variance < 1e-24.
SubbandStats subband_stats(std::span<const double> coeffs);

/// [D1 stats, ..., Dn stats, An stats], each block in kSubbandStatNames order.
std::vector<double> wavelet_features(std::span<const double> signal, std::size_t levels = 5);

}  // namespace ehg
