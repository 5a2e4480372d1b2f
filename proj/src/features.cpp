#include "ehg/features.hpp"

#include <cstdio>

#include "ehg/errors.hpp"
#include "ehg/wavelet.hpp"

namespace ehg {

std::size_t features_per_channel(const FeatureOptions& opts) {
  return opts.mfcc.n_coeffs + kStatsPerBand * (opts.wavelet_levels + 1) + 1;
}

std::vector<std::string> channel_feature_names(std::size_t channel_number, const FeatureOptions& opts) {
  const std::string prefix = "ch" + std::to_string(channel_number) + "_";
  std::vector<std::string> names;
  names.reserve(features_per_channel(opts));
  char buf[16];
  for (std::size_t i = 0; i < opts.mfcc.n_coeffs; ++i) {
    std::snprintf(buf, sizeof buf, "%02zu", i);
    names.push_back(prefix + "mfcc" + buf);
  }
  for (std::size_t band = 0; band <= opts.wavelet_levels; ++band) {
    const std::string band_name =
        band < opts.wavelet_levels ? "d" + std::to_string(band + 1) : "a" + std::to_string(opts.wavelet_levels);
    for (auto stat : kSubbandStatNames) names.push_back(prefix + "wl_" + band_name + "_" + std::string(stat));
  }
  names.push_back(prefix + "pa");
  return names;
}

ChannelFeatures channel_features(std::span<const double> signal, double fs, const FeatureOptions& opts) {
  ChannelFeatures out;
  out.values.reserve(features_per_channel(opts));

  const auto m = mfcc(signal, fs, opts.mfcc);
  out.mfcc_zero_padded = m.zero_padded;
  out.values.insert(out.values.end(), m.coeffs.begin(), m.coeffs.end());

  const auto wl = wavelet_features(signal, opts.wavelet_levels);
  out.values.insert(out.values.end(), wl.begin(), wl.end());

  const auto ps = welch_psd(signal, fs, opts.psd);
  double pa = 0.0;
  try {
    pa = peak_amplitude(ps, opts.pa_low_hz, opts.pa_high_hz);
  } catch (const UndefinedFeatureError&) {
    out.pa_undefined = true;
  }
  out.values.push_back(pa);
  return out;
}

}  // namespace ehg
