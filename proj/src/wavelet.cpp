#include "ehg/wavelet.hpp"

#include <cmath>
#include <string>

#include "ehg/errors.hpp"

namespace ehg {

namespace {

constexpr std::size_t kTaps = 16;
// Alignment so that the transform matches the common periodization convention.
constexpr std::size_t kShift = kTaps / 2 - 1;

void analysis_step(std::span<const double> x, std::vector<double>& approx, std::vector<double>& detail) {
  const auto& h = db8_scaling_filter();
  const auto g = db8_wavelet_filter();
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t j = 0; j < kTaps; ++j) {
      const std::size_t idx = (2 * i + j + n * kTaps - kShift) % n;
      a += h[j] * x[idx];
      d += g[j] * x[idx];
    }
    approx[i] = a;
    detail[i] = d;
  }
}

std::vector<double> synthesis_step(std::span<const double> approx, std::span<const double> detail) {
  const auto& h = db8_scaling_filter();
  const auto g = db8_wavelet_filter();
  const std::size_t n = approx.size() * 2;
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < approx.size(); ++i) {
    for (std::size_t j = 0; j < kTaps; ++j) {
      const std::size_t idx = (2 * i + j + n * kTaps - kShift) % n;
      x[idx] += h[j] * approx[i] + g[j] * detail[i];
    }
  }
  return x;
}

}  // namespace

const std::array<double, 16>& db8_scaling_filter() {
  static const std::array<double, 16> h = {
      0.05441584224310401,     0.31287159091429995,    0.6756307362972898,
      0.5853546836542067,      -0.015829105256349306,  -0.2840155429615469,
      0.0004724845739132828,   0.12874742662047847,    -0.017369301001807547,
      -0.044088253930794755,   0.013981027917398282,   0.008746094047405777,
      -0.004870352993451574,   -0.00039174037337694705, 0.0006754494064505693,
      -0.00011747678412476953};
  return h;
}

std::array<double, 16> db8_wavelet_filter() {
  const auto& h = db8_scaling_filter();
  std::array<double, 16> g{};
  for (std::size_t j = 0; j < kTaps; ++j) g[j] = (j % 2 == 0 ? 1.0 : -1.0) * h[kTaps - 1 - j];
  return g;
}

WaveletDecomposition dwt_db8(std::span<const double> signal, std::size_t levels) {
  if (levels == 0) throw ValidationError("dwt_db8: need at least one level");
  const std::size_t block = std::size_t{1} << levels;
  if (signal.size() < block) {
    throw LengthError("dwt_db8: " + std::to_string(levels) + " levels need at least " +
                      std::to_string(block) + " samples, got " + std::to_string(signal.size()));
  }

  WaveletDecomposition dec;
  dec.original_length = signal.size();
  dec.padded_length = (signal.size() + block - 1) / block * block;

  std::vector<double> current(dec.padded_length);
  for (std::size_t i = 0; i < dec.padded_length; ++i) current[i] = signal[i % signal.size()];

  for (std::size_t level = 0; level < levels; ++level) {
    std::vector<double> approx, detail;
    analysis_step(current, approx, detail);
    dec.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  dec.approximation = std::move(current);
  return dec;
}

std::vector<double> idwt_db8(const WaveletDecomposition& dec) {
  std::vector<double> current = dec.approximation;
  for (std::size_t level = dec.details.size(); level-- > 0;) {
    if (dec.details[level].size() != current.size()) throw ValidationError("idwt_db8: inconsistent sub-band sizes");
    current = synthesis_step(current, dec.details[level]);
  }
  current.resize(dec.original_length);
  return current;
}

SubbandStats subband_stats(std::span<const double> c) {
  if (c.empty()) throw ValidationError("subband_stats: empty coefficient sequence");
  const auto n = static_cast<double>(c.size());
  SubbandStats s;
  for (double v : c) {
    s.mean += v;
    s.energy += v * v;
    s.absolute_sum += std::abs(v);
  }
  s.mean /= n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : c) {
    const double d = v - s.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.variance = m2;
  if (m2 >= 1e-24) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

std::vector<double> wavelet_features(std::span<const double> signal, std::size_t levels) {
  const auto dec = dwt_db8(signal, levels);
  std::vector<double> out;
  out.reserve((levels + 1) * kStatsPerBand);
  auto append = [&](std::span<const double> band) {
    const auto s = subband_stats(band);
    out.insert(out.end(), {s.mean, s.variance, s.energy, s.absolute_sum, s.skewness, s.kurtosis});
  };
  for (const auto& d : dec.details) append(d);
  append(dec.approximation);
  return out;
}

}  // namespace ehg
