#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ehg/errors.hpp"
#include "ehg/features.hpp"
#include "ehg/fft.hpp"
#include "ehg/random.hpp"
#include "ehg/spectral.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace ehg;

TEST_CASE("fft matches the direct DFT for radix-2 and Bluestein sizes") {
  Rng rng(3);
  for (std::size_t n : {1u, 2u, 8u, 64u, 3u, 12u, 100u, 257u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    auto y = x;
    fft_inplace(y);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc = 0;
      for (std::size_t j = 0; j < n; ++j) {
        acc += x[j] * std::polar(1.0, -2 * std::numbers::pi * static_cast<double>(k * j % n) / static_cast<double>(n));
      }
      CHECK(std::abs(acc - y[k]) < 1e-9);
    }
  }
}

TEST_CASE("welch: peak location, scaling and scipy agreement") {
  const auto tone = testing::sine(3600, 1.0);
  const auto ps = welch_psd(tone, 20.0);
  const auto peak = static_cast<std::size_t>(std::max_element(ps.psd.begin(), ps.psd.end()) - ps.psd.begin());
  CHECK(peak == static_cast<std::size_t>(std::lround(1.0 / ps.resolution_hz)));
  double total = 0;
  for (double p : ps.psd) total += p * ps.resolution_hz;
  CHECK(total == doctest::Approx(0.5).epsilon(0.01));

  const auto probe = welch_psd(testing::probe_signal(3600), 20.0);
  for (std::size_t i = 0; i < oracle::kWelchBins.size(); ++i) {
    const auto k = static_cast<std::size_t>(oracle::kWelchBins[i]);
    CHECK(probe.psd[k] == doctest::Approx(oracle::kWelchPsd[i]).epsilon(1e-9).scale(1e-12));
  }

  const auto zero = welch_psd(std::vector<double>(1000, 0.0), 20.0);
  CHECK(std::all_of(zero.psd.begin(), zero.psd.end(), [](double v) { return v == 0.0; }));

  const auto short_ps = welch_psd(testing::sine(100, 1.0), 20.0);
  CHECK(short_ps.single_periodogram_fallback);
  CHECK(short_ps.n_segments == 1);
}

TEST_CASE("welch: white noise is roughly flat") {
  Rng rng(17);
  std::vector<double> avg;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(3600);
    for (auto& v : x) v = testing::gaussian(rng);
    const auto ps = welch_psd(x, 20.0);
    if (avg.empty()) avg.assign(ps.psd.size(), 0.0);
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += ps.psd[k] / 20.0;
  }
  // band averages over 16-bin groups, skipping the DC bin that mean removal empties
  std::vector<double> bands;
  for (std::size_t k = 1; k + 16 <= avg.size(); k += 16) {
    double s = 0;
    for (std::size_t j = k; j < k + 16; ++j) s += avg[j];
    bands.push_back(s / 16);
  }
  CHECK(*std::max_element(bands.begin(), bands.end()) / *std::min_element(bands.begin(), bands.end()) < 3.0);
}

TEST_CASE("peak amplitude") {
  PowerSpectrum ps;
  ps.freqs_hz = {0, 1, 2, 3};
  ps.psd = {0, 4, 1, 0};
  ps.resolution_hz = 1;
  CHECK(peak_amplitude(ps, 0, 3) == doctest::Approx(0.8));
  ps.psd = {0, 0, 2.5, 0};
  CHECK(peak_amplitude(ps, 0, 3) == 1.0);
  ps.psd = {1, 1, 1, 1};
  CHECK(peak_amplitude(ps, 0, 3) == doctest::Approx(0.25));
  CHECK(peak_amplitude(ps, 1, 2) == doctest::Approx(0.5));
  ps.psd = {1, 0, 0, 1};
  CHECK_THROWS_AS(peak_amplitude(ps, 1, 2), UndefinedFeatureError);
}

TEST_CASE("mel scale") {
  CHECK(hz_to_mel(0) == 0.0);
  CHECK(std::abs(hz_to_mel(700) - 781.17) < 0.01);
  CHECK(std::abs(hz_to_mel(700) - 2595 * std::log10(2.0)) < 1e-12);
  CHECK(std::abs(hz_to_mel(1000) - 999.99) < 0.01);
  for (double f : {0.0, 0.01, 1.0, 10.0, 700.0, 8000.0}) CHECK(std::abs(mel_to_hz(hz_to_mel(f)) - f) < 1e-9);
  CHECK_THROWS_AS(hz_to_mel(-1), ValidationError);
}

TEST_CASE("dct-II is orthonormal") {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  const auto c = dct2_orthonormal(v);
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < v.size(); ++i) e1 += v[i] * v[i], e2 += c[i] * c[i];
  CHECK(e1 == doctest::Approx(e2));
  CHECK(c[0] == doctest::Approx(15 / std::sqrt(5.0)));
}

TEST_CASE("mfcc") {
  const auto zero = mfcc(std::vector<double>(3600, 0.0), 20.0);
  REQUIRE(zero.coeffs.size() == 20);
  CHECK(zero.coeffs[0] == doctest::Approx(std::sqrt(26.0) * std::log(1e-10)).epsilon(1e-12));
  for (std::size_t k = 1; k < 20; ++k) CHECK(std::abs(zero.coeffs[k]) < 1e-9);

  const auto tone = mfcc(testing::sine(3600, 1.0), 20.0);
  const auto probe = mfcc(testing::probe_signal(3600), 20.0);
  for (std::size_t k = 0; k < 20; ++k) {
    CHECK(std::abs(tone.coeffs[k] - oracle::kMfccSine1Hz[k]) < 1e-6);
    CHECK(std::abs(probe.coeffs[k] - oracle::kMfccProbe[k]) < 1e-6);
  }
  CHECK(tone.n_frames == (3600 - 256) / 128 + 1);

  const auto small = mfcc(testing::sine(100, 1.0), 20.0);
  CHECK(small.zero_padded);
  CHECK(small.n_frames == 1);
}

TEST_CASE("mfcc gain shifts c0 only") {
  const auto x = testing::probe_signal(2000);
  auto scaled = x;
  const double g = 3.7;
  for (auto& v : scaled) v *= g;
  const auto a = mfcc(x, 20.0);
  const auto b = mfcc(scaled, 20.0);
  CHECK(b.coeffs[0] - a.coeffs[0] == doctest::Approx(2 * std::log(g) * std::sqrt(26.0)).epsilon(1e-9));
  for (std::size_t k = 1; k < 20; ++k) CHECK(std::abs(b.coeffs[k] - a.coeffs[k]) < 1e-6);
}

TEST_CASE("channel feature layout") {
  FeatureOptions opts;
  CHECK(features_per_channel(opts) == 57);
  const auto names = channel_feature_names(2, opts);
  REQUIRE(names.size() == 57);
  CHECK(names.front() == "ch2_mfcc00");
  CHECK(names[20] == "ch2_wl_d1_mean");
  CHECK(names[55] == "ch2_wl_a5_kurt");
  CHECK(names.back() == "ch2_pa");
  const auto f = channel_features(testing::probe_signal(3600), 20.0, opts);
  CHECK(f.values.size() == 57);
  CHECK(!f.pa_undefined);
  CHECK(std::all_of(f.values.begin(), f.values.end(), [](double v) { return std::isfinite(v); }));
}
