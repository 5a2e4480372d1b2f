#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ehg/record_io.hpp"

namespace ehg {

/// One biquad in direct form II transposed: H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
struct SecondOrderSection {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

/// Digital Butterworth band-pass. `order` is the total filter order (number of poles),
/// so order 4 yields two second-order sections.
struct BandpassFilter {
  int order = 4;
  double low_cut_hz = 0.08;
  double high_cut_hz = 5.0;
  double sampling_rate_hz = 20.0;
  std::vector<SecondOrderSection> sections;
};

BandpassFilter design_butterworth_bandpass(int order, double low_cut_hz, double high_cut_hz,
                                           double fs);

/// Single-pass magnitude |H(e^{jw})| at `freq_hz`.
double magnitude_response(const BandpassFilter& filter, double freq_hz);

/// Largest pole radius across sections; < 1 means stable.
double max_pole_radius(const BandpassFilter& filter);

/// Causal single pass with steady-state initial conditions scaled to the first sample.
std::vector<double> apply_causal(const BandpassFilter& filter, std::span<const double> signal);

/// Forward-backward filtering with odd reflection padding of 3 x order samples at each end.
/// Requires signal.size() > 3 * order.
std::vector<double> apply_zero_phase(const BandpassFilter& filter, std::span<const double> signal);

enum class WindowKind { Contraction, Dummy, Fixed };
std::string_view to_string(WindowKind k);

struct Segment {
  std::string record_name;
  std::size_t segment_index = 0;
  std::vector<std::vector<double>> channels;
  Group label = Group::Term;
  WindowKind window_kind = WindowKind::Fixed;
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;

  std::size_t length() const { return channels.empty() ? 0 : channels.front().size(); }
};

/// Non-overlapping windows of round(window_seconds * fs) samples; the trailing remainder is dropped.
std::vector<Segment> segment_fixed(const Record& record, double window_seconds = 180.0);

/// One segment per annotation of this record, ordered by start sample.
std::vector<Segment> segment_annotated(const Record& record,
                                       std::span<const IntervalAnnotation> annotations);

}  // namespace ehg
