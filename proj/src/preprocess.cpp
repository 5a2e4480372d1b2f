#include "ehg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "ehg/errors.hpp"

namespace ehg {

namespace {

using cplx = std::complex<double>;

// Bilinear map s -> z with the prewarping folded into the analog frequencies (K = 1).
cplx bilinear(cplx s) { return (1.0 + s) / (1.0 - s); }

SecondOrderSection section_from_poles(cplx z1, cplx z2) {
  SecondOrderSection sec;
  // Band-pass numerator: one zero at z = 1 (DC) and one at z = -1 (Nyquist).
  sec.b0 = 1.0;
  sec.b1 = 0.0;
  sec.b2 = -1.0;
  sec.a1 = -(z1 + z2).real();
  sec.a2 = (z1 * z2).real();
  return sec;
}

cplx section_response(const SecondOrderSection& s, double omega) {
  const cplx z1 = std::polar(1.0, -omega);
  const cplx z2 = z1 * z1;
  return (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
}

void filter_in_place(const SecondOrderSection& s, std::vector<double>& x) {
  if (x.empty()) return;
  // Steady state for a constant input equal to x[0].
  const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  double z1 = (dc - s.b0) * x[0];
  double z2 = (s.b2 - s.a2 * dc) * x[0];
  for (double& v : x) {
    const double in = v;
    const double out = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * out + z2;
    z2 = s.b2 * in - s.a2 * out;
    v = out;
  }
}

}  // namespace

BandpassFilter design_butterworth_bandpass(int order, double low_cut_hz, double high_cut_hz,
                                           double fs) {
  if (order < 2 || order % 2 != 0) throw ValidationError("band-pass order must be even and >= 2");
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  if (!(low_cut_hz > 0.0) || !(low_cut_hz < high_cut_hz) || !(high_cut_hz < fs / 2.0)) {
    throw ValidationError("band-pass design requires 0 < low_cut < high_cut < fs/2 (got " +
                          std::to_string(low_cut_hz) + ", " + std::to_string(high_cut_hz) +
                          " at fs " + std::to_string(fs) + ")");
  }

  const double w_lo = std::tan(std::numbers::pi * low_cut_hz / fs);
  const double w_hi = std::tan(std::numbers::pi * high_cut_hz / fs);
  const double bandwidth = w_hi - w_lo;
  const double center_sq = w_lo * w_hi;
  const int proto_order = order / 2;

  BandpassFilter f;
  f.order = order;
  f.low_cut_hz = low_cut_hz;
  f.high_cut_hz = high_cut_hz;
  f.sampling_rate_hz = fs;

  // Each low-pass prototype pole p maps to the two roots of s^2 - p*B*s + W0^2.
  for (int k = 0; k < proto_order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + proto_order + 1) / (2.0 * proto_order);
    const cplx p = std::polar(1.0, theta);
    if (p.imag() < -1e-12) continue;  // conjugate of a pole already handled
    const cplx pb = p * bandwidth;
    const cplx disc = std::sqrt(pb * pb - 4.0 * center_sq);
    const cplx s1 = (pb + disc) / 2.0;
    const cplx s2 = (pb - disc) / 2.0;
    if (std::abs(p.imag()) <= 1e-12) {
      // Real prototype pole: its two band-pass poles form one real-coefficient section.
      f.sections.push_back(section_from_poles(bilinear(s1), bilinear(s2)));
    } else {
      f.sections.push_back(section_from_poles(bilinear(s1), std::conj(bilinear(s1))));
      f.sections.push_back(section_from_poles(bilinear(s2), std::conj(bilinear(s2))));
    }
  }

  // Unit gain at the digital image of the analog geometric center.
  const double omega_center = 2.0 * std::atan(std::sqrt(center_sq));
  for (auto& sec : f.sections) {
    const double g = 1.0 / std::abs(section_response(sec, omega_center));
    sec.b0 *= g;
    sec.b1 *= g;
    sec.b2 *= g;
  }
  return f;
}

double magnitude_response(const BandpassFilter& filter, double freq_hz) {
  const double omega = 2.0 * std::numbers::pi * freq_hz / filter.sampling_rate_hz;
  double mag = 1.0;
  for (const auto& s : filter.sections) mag *= std::abs(section_response(s, omega));
  return mag;
}

double max_pole_radius(const BandpassFilter& filter) {
  double r = 0.0;
  for (const auto& s : filter.sections) {
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    r = std::max({r, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
  }
  return r;
}

std::vector<double> apply_causal(const BandpassFilter& filter, std::span<const double> signal) {
  std::vector<double> y(signal.begin(), signal.end());
  for (const auto& s : filter.sections) filter_in_place(s, y);
  return y;
}

std::vector<double> apply_zero_phase(const BandpassFilter& filter, std::span<const double> signal) {
  const std::size_t pad = 3 * static_cast<std::size_t>(filter.order);
  const std::size_t n = signal.size();
  if (n <= pad) {
    throw LengthError("zero-phase filtering needs more than " + std::to_string(pad) +
                      " samples, got " + std::to_string(n));
  }

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal[0] - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  for (const auto& s : filter.sections) filter_in_place(s, ext);
  std::reverse(ext.begin(), ext.end());
  for (const auto& s : filter.sections) filter_in_place(s, ext);
  std::reverse(ext.begin(), ext.end());

  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::string_view to_string(WindowKind k) {
  switch (k) {
    case WindowKind::Contraction: return "contraction";
    case WindowKind::Dummy: return "dummy";
    case WindowKind::Fixed: return "fixed";
  }
  return "unknown";
}

namespace {

Group classification_label(const Record& record) {
  if (record.group == Group::Nonpregnant) {
    throw ValidationError("record " + record.header.record_name +
                          " is from the nonpregnant group and has no term/preterm label");
  }
  return record.group;
}

Segment slice(const Record& record, std::size_t start, std::size_t end) {
  Segment seg;
  seg.record_name = record.header.record_name;
  seg.label = classification_label(record);
  seg.start_sample = start;
  seg.end_sample = end;
  seg.channels.reserve(record.signals.size());
  for (const auto& ch : record.signals) {
    seg.channels.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(start),
                              ch.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return seg;
}

}  // namespace

std::vector<Segment> segment_fixed(const Record& record, double window_seconds) {
  if (!(window_seconds > 0.0)) throw ValidationError("window length must be positive");
  const auto window = static_cast<std::size_t>(std::llround(window_seconds * record.header.sampling_rate_hz));
  if (window == 0) throw ValidationError("window shorter than one sample");
  const std::size_t count = record.header.n_samples / window;

  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Segment seg = slice(record, i * window, (i + 1) * window);
    seg.segment_index = i;
    seg.window_kind = WindowKind::Fixed;
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<Segment> segment_annotated(const Record& record,
                                       std::span<const IntervalAnnotation> annotations) {
  const auto& name = record.header.record_name;
  std::vector<const IntervalAnnotation*> mine;
  for (const auto& a : annotations) {
    if (a.record_name != name) {
      throw ValidationError("annotation for record " + a.record_name + " passed with record " + name);
    }
    mine.push_back(&a);
  }
  validate_annotation_bounds(annotations, name, record.header.n_samples);
  std::stable_sort(mine.begin(), mine.end(), [](const auto* a, const auto* b) {
    return a->start_sample < b->start_sample;
  });

  std::vector<Segment> out;
  out.reserve(mine.size());
  for (std::size_t i = 0; i < mine.size(); ++i) {
    Segment seg = slice(record, mine[i]->start_sample, mine[i]->end_sample);
    seg.segment_index = i;
    seg.window_kind = mine[i]->kind == IntervalKind::Contraction ? WindowKind::Contraction
                                                                  : WindowKind::Dummy;
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace ehg
