#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ehg/spectral.hpp"

namespace ehg {

struct FeatureOptions {
  WelchOptions psd;
  double pa_low_hz = 0.08;
  double pa_high_hz = 5.0;
  MfccOptions mfcc;
  std::size_t wavelet_levels = 5;
};

/// 20 MFCC + 6 stats x (levels + 1) bands + 1 PA; 57 at the defaults.
std::size_t features_per_channel(const FeatureOptions& opts);

/// Column names for channel `channel_number` (1-based): ch{n}_mfcc00.., ch{n}_wl_{band}_{stat}, ch{n}_pa.
std::vector<std::string> channel_feature_names(std::size_t channel_number, const FeatureOptions& opts);

struct ChannelFeatures {
  std::vector<double> values;
  bool pa_undefined = false;  // band carried no power; PA recorded as 0
  bool mfcc_zero_padded = false;
};

ChannelFeatures channel_features(std::span<const double> signal, double fs, const FeatureOptions& opts);

}  // namespace ehg
