#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "ehg/errors.hpp"
#include "ehg/preprocess.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

using namespace ehg;

namespace {

double db(double mag) { return 20.0 * std::log10(mag); }

// Analog Butterworth band-pass prototype evaluated through the bilinear map with
// pre-warped edges: |H| = 1 / sqrt(1 + ((w^2 - w0^2) / (B w))^(2N)), N = order / 2.
double analytic_magnitude(double f, double lo, double hi, double fs, int order) {
  const auto warp = [&](double hz) { return 2.0 * fs * std::tan(std::numbers::pi * hz / fs); };
  const double w = warp(f), wl = warp(lo), wh = warp(hi);
  if (w == 0.0) return 0.0;
  const double x = (w * w - wl * wh) / ((wh - wl) * w);
  return 1.0 / std::sqrt(1.0 + std::pow(x * x, order / 2));
}

}  // namespace

TEST_CASE("band-pass design against the analytic response") {
  const auto f = design_butterworth_bandpass(4, 0.08, 5.0, 20.0);
  CHECK(f.sections.size() == 2);
  CHECK(max_pole_radius(f) < 1.0);
  CHECK(std::abs(db(magnitude_response(f, std::sqrt(0.08 * 5.0)))) < 0.1);
  CHECK(std::abs(db(magnitude_response(f, 0.08)) + 3.0103) < 0.3);
  CHECK(std::abs(db(magnitude_response(f, 5.0)) + 3.0103) < 0.3);
  CHECK(magnitude_response(f, 0.0) < 0.01);
  for (double hz : {0.01, 0.05, 0.2, 1.0, 3.0, 7.0, 9.5}) {
    CHECK(magnitude_response(f, hz) == doctest::Approx(analytic_magnitude(hz, 0.08, 5.0, 20.0, 4)).epsilon(1e-9));
  }
}

TEST_CASE("band-pass design matches scipy") {
  const auto f = design_butterworth_bandpass(4, 0.08, 5.0, 20.0);
  for (std::size_t i = 0; i < oracle::kButterProbeHz.size(); ++i) {
    CHECK(magnitude_response(f, oracle::kButterProbeHz[i]) == doctest::Approx(oracle::kButterMagnitude[i]).epsilon(1e-9));
  }
  const auto x = testing::probe_signal(400);
  const auto causal = apply_causal(f, x);
  const auto zp = apply_zero_phase(f, x);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(causal[20 * i] == doctest::Approx(oracle::kCausalEvery20[i]).epsilon(1e-9).scale(1.0));
    CHECK(zp[20 * i] == doctest::Approx(oracle::kFiltfiltEvery20[i]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("band-pass design errors") {
  CHECK_THROWS_AS(design_butterworth_bandpass(4, 0.08, 11.0, 20.0), ValidationError);
  CHECK_THROWS_AS(design_butterworth_bandpass(4, 5.0, 0.08, 20.0), ValidationError);
  CHECK_THROWS_AS(design_butterworth_bandpass(3, 0.08, 5.0, 20.0), ValidationError);
}

TEST_CASE("zero-phase filtering") {
  const auto f = design_butterworth_bandpass(4, 0.08, 5.0, 20.0);
  const std::size_t n = 6000;
  CHECK(apply_zero_phase(f, std::vector<double>(n, 0.0)) == std::vector<double>(n, 0.0));

  const double fc = std::sqrt(0.08 * 5.0);
  const auto tone = testing::sine(n, fc);
  const auto y = apply_zero_phase(f, tone);
  double peak = 0.0, err = 0.0;
  for (std::size_t i = 200; i < n - 200; ++i) peak = std::max(peak, std::abs(y[i]));
  // no phase shift either, once the slow edge transient has gone
  for (std::size_t i = 600; i < n - 600; ++i) err = std::max(err, std::abs(y[i] - tone[i]));
  CHECK(peak == doctest::Approx(1.0).epsilon(0.02));
  CHECK(err < 0.02);

  // DC is gone once 10 s of edge transient are dropped
  const auto dc = apply_zero_phase(f, std::vector<double>(n, 1.0));
  for (std::size_t i = 200; i < n - 200; ++i) CHECK(std::abs(dc[i]) < 0.01);

  CHECK_THROWS_AS(apply_zero_phase(f, std::vector<double>(12, 1.0)), LengthError);
}
