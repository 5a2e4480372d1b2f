#include "ehg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <tuple>

#include "ehg/errors.hpp"
#include "ehg/fft.hpp"

namespace ehg {

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n <= 1) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

PowerSpectrum welch_psd(std::span<const double> x, double fs, const WelchOptions& opt) {
  if (!(fs > 0.0)) throw ValidationError("welch_psd: sampling rate must be positive");
  if (opt.overlap < 0.0 || opt.overlap >= 1.0) throw ValidationError("welch_psd: overlap must be in [0, 1)");
  if (opt.seg_len < 2) throw ValidationError("welch_psd: segment length must be at least 2");
  if (x.size() < 2) throw LengthError("welch_psd: need at least 2 samples");

  PowerSpectrum ps;
  std::size_t seg_len = opt.seg_len;
  if (x.size() < seg_len) {
    seg_len = x.size();
    ps.single_periodogram_fallback = true;
  }
  const auto noverlap = static_cast<std::size_t>(std::floor(static_cast<double>(seg_len) * opt.overlap));
  const std::size_t hop = std::max<std::size_t>(1, seg_len - noverlap);
  const std::size_t nfreq = seg_len / 2 + 1;

  const auto window = hann_window(seg_len);
  const double window_power = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);
  const double scale = 1.0 / (fs * window_power);

  std::vector<double> acc(nfreq, 0.0);
  std::vector<std::complex<double>> buf(seg_len);
  for (std::size_t start = 0; start + seg_len <= x.size(); start += hop) {
    const double mean = std::accumulate(x.begin() + static_cast<std::ptrdiff_t>(start),
                                        x.begin() + static_cast<std::ptrdiff_t>(start + seg_len), 0.0) /
                        static_cast<double>(seg_len);
    for (std::size_t i = 0; i < seg_len; ++i) buf[i] = {(x[start + i] - mean) * window[i], 0.0};
    fft_inplace(buf);
    for (std::size_t k = 0; k < nfreq; ++k) {
      double p = std::norm(buf[k]) * scale;
      const bool nyquist = seg_len % 2 == 0 && k == seg_len / 2;
      if (k != 0 && !nyquist) p *= 2.0;
      acc[k] += p;
    }
    ++ps.n_segments;
  }

  ps.resolution_hz = fs / static_cast<double>(seg_len);
  ps.freqs_hz.resize(nfreq);
  ps.psd.resize(nfreq);
  for (std::size_t k = 0; k < nfreq; ++k) {
    ps.freqs_hz[k] = static_cast<double>(k) * ps.resolution_hz;
    ps.psd[k] = acc[k] / static_cast<double>(ps.n_segments);
  }
  return ps;
}

double peak_amplitude(const PowerSpectrum& ps, double f_low, double f_high) {
  if (ps.freqs_hz.size() != ps.psd.size()) throw ValidationError("peak_amplitude: malformed spectrum");
  double total = 0.0;
  double peak = 0.0;
  std::size_t bins = 0;
  for (std::size_t i = 0; i < ps.freqs_hz.size(); ++i) {
    const double f = ps.freqs_hz[i];
    if (f < f_low || f > f_high) continue;
    total += ps.psd[i];
    peak = std::max(peak, ps.psd[i]);
    ++bins;
  }
  if (bins == 0) throw ValidationError("peak_amplitude: no frequency bins inside the band");
  if (!(total > 0.0)) throw UndefinedFeatureError("peak_amplitude: zero power in band");
  return peak / total;
}

double hz_to_mel(double hz) {
  if (hz < 0.0) throw ValidationError("hz_to_mel: negative frequency");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank make_mel_filterbank(std::size_t n_filters, std::size_t n_fft, double fs,
                                  double fmin_hz, double fmax_hz) {
  if (n_filters == 0 || n_fft < 2) throw ValidationError("mel filterbank: need filters and n_fft >= 2");
  if (!(fmin_hz >= 0.0) || !(fmax_hz > fmin_hz) || fmax_hz > fs / 2.0 + 1e-9) {
    throw ValidationError("mel filterbank: need 0 <= fmin < fmax <= fs/2");
  }
  MelFilterbank fb;
  fb.n_filters = n_filters;
  fb.n_fft = n_fft;
  fb.sampling_rate_hz = fs;
  fb.fmin_hz = fmin_hz;
  fb.fmax_hz = fmax_hz;

  const double mel_lo = hz_to_mel(fmin_hz);
  const double mel_hi = hz_to_mel(fmax_hz);
  for (std::size_t i = 0; i < n_filters + 2; ++i) {
    fb.edges_hz.push_back(mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                                 static_cast<double>(n_filters + 1)));
  }

  const std::size_t nbins = n_fft / 2 + 1;
  fb.weights.assign(n_filters, std::vector<double>(nbins, 0.0));
  for (std::size_t j = 0; j < n_filters; ++j) {
    const double left = fb.edges_hz[j];
    const double center = fb.edges_hz[j + 1];
    const double right = fb.edges_hz[j + 2];
    for (std::size_t k = 0; k < nbins; ++k) {
      const double f = static_cast<double>(k) * fs / static_cast<double>(n_fft);
      if (f > left && f <= center) {
        fb.weights[j][k] = (f - left) / (center - left);
      } else if (f > center && f < right) {
        fb.weights[j][k] = (right - f) / (right - center);
      }
    }
  }
  return fb;
}

std::shared_ptr<const MelFilterbank> cached_mel_filterbank(std::size_t n_filters, std::size_t n_fft,
                                                           double fs) {
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, double>, std::shared_ptr<const MelFilterbank>> cache;
  const auto key = std::make_tuple(n_filters, n_fft, fs);
  std::lock_guard lock(mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_shared<const MelFilterbank>(make_mel_filterbank(n_filters, n_fft, fs, 0.0, fs / 2.0));
  return slot;
}

std::vector<double> dct2_orthonormal(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += v[i] * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) /
                             (2.0 * static_cast<double>(n)));
    }
    out[k] = acc * std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
  }
  return out;
}

MfccResult mfcc(std::span<const double> signal, double fs, const MfccOptions& opt) {
  if (opt.frame < 2 || opt.hop == 0) throw ValidationError("mfcc: invalid frame/hop");
  if (opt.n_coeffs == 0 || opt.n_coeffs > opt.n_filters) {
    throw ValidationError("mfcc: n_coeffs must be in [1, n_filters]");
  }
  if (signal.empty()) throw LengthError("mfcc: empty signal");

  const auto bank = cached_mel_filterbank(opt.n_filters, opt.frame, fs);
  const auto window = hann_window(opt.frame);
  const std::size_t nbins = opt.frame / 2 + 1;

  MfccResult res;
  res.coeffs.assign(opt.n_coeffs, 0.0);
  res.zero_padded = signal.size() < opt.frame;

  std::vector<std::complex<double>> buf(opt.frame);
  std::vector<double> power(nbins);
  std::vector<double> log_energy(opt.n_filters);

  auto process_frame = [&](std::size_t start) {
    for (std::size_t i = 0; i < opt.frame; ++i) {
      const double v = start + i < signal.size() ? signal[start + i] : 0.0;
      buf[i] = {v * window[i], 0.0};
    }
    fft_inplace(buf);
    for (std::size_t k = 0; k < nbins; ++k) power[k] = std::norm(buf[k]);
    for (std::size_t j = 0; j < opt.n_filters; ++j) {
      const double e = std::inner_product(power.begin(), power.end(), bank->weights[j].begin(), 0.0);
      log_energy[j] = std::log(std::max(e, opt.power_floor));
    }
    const auto c = dct2_orthonormal(log_energy);
    for (std::size_t k = 0; k < opt.n_coeffs; ++k) res.coeffs[k] += c[k];
    ++res.n_frames;
  };

  if (res.zero_padded) {
    process_frame(0);
  } else {
    for (std::size_t start = 0; start + opt.frame <= signal.size(); start += opt.hop) process_frame(start);
  }
  for (double& c : res.coeffs) c /= static_cast<double>(res.n_frames);
  return res;
}

}  // namespace ehg
