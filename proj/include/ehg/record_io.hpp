#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ehg {

enum class Group { Preterm, Term, Nonpregnant };
enum class ChannelRole { Ehg, Toco };
enum class IntervalKind { Contraction, Dummy };

std::string_view to_string(Group g);
std::string_view to_string(ChannelRole r);
std::string_view to_string(IntervalKind k);
Group parse_group(std::string_view text);
IntervalKind parse_interval_kind(std::string_view text);

/// Delivery before this many completed weeks counts as preterm.
inline constexpr double kPretermGestationWeeks = 37.0;

/// WFDB default ADC gain (adu per physical unit) when the header leaves it unset.
inline constexpr double kDefaultAdcGain = 200.0;

struct ChannelInfo {
  std::string file_name;
  int storage_format = 16;
  double adc_gain = kDefaultAdcGain;
  int baseline = 0;
  std::string units;
  std::string label;
};

struct RecordHeader {
  std::string record_name;
  std::size_t n_channels = 0;
  double sampling_rate_hz = 0.0;
  std::size_t n_samples = 0;
  std::vector<ChannelInfo> channels;

  /// Comment lines with the leading '#' stripped, in file order.
  std::vector<std::string> comments;
  std::optional<double> gestation_weeks;
  std::optional<Group> group;
};

struct Record {
  RecordHeader header;
  std::vector<std::vector<double>> signals;  // physical units, one vector per channel
  Group group = Group::Term;
  std::vector<ChannelRole> channel_roles;
  std::optional<double> gestation_at_delivery_weeks;

  double duration_seconds() const {
    return static_cast<double>(header.n_samples) / header.sampling_rate_hz;
  }
};

struct IntervalAnnotation {
  std::string record_name;
  IntervalKind kind = IntervalKind::Contraction;
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;  // exclusive
};

/// Parses a WFDB header. Comment lines ("#...") may appear anywhere; the first
/// non-comment line is the record line, followed by one line per signal.
/// Recognized comment metadata: "Gestation <weeks>" and "Group <preterm|term|nonpregnant>".
RecordHeader parse_header(std::string_view text);

/// Decodes a format-16 signal file shared by all channels of `header`
/// (little-endian int16, interleaved sample-major) into physical units.
std::vector<std::vector<double>> read_signals(const RecordHeader& header,
                                              std::span<const std::uint8_t> bytes);

/// Inverse of parse_header for the subset of fields this library reads.
std::string format_header(const RecordHeader& header);

/// Quantizes physical samples to format 16 (round to nearest, saturating).
std::vector<std::uint8_t> encode_format16(const RecordHeader& header,
                                          const std::vector<std::vector<double>>& signals);

/// Reads `record,kind,start_sample,end_sample` rows. Rejects inverted intervals and
/// intervals overlapping another interval of the same record.
std::vector<IntervalAnnotation> load_annotations(std::string_view csv);

/// Checks every annotation of `record_name` lies within [0, n_samples].
void validate_annotation_bounds(std::span<const IntervalAnnotation> annotations,
                                std::string_view record_name, std::size_t n_samples);

/// Dataset index: `record,group` rows.
std::map<std::string, Group> load_group_index(std::string_view csv);

ChannelRole role_from_label(std::string_view label);

/// Loads <dir>/<name>.hea and the signal files it references. Group comes from
/// header metadata when present, else from `index`; a record with neither is an error.
Record load_record(const std::filesystem::path& header_path,
                   const std::map<std::string, Group>& index = {});

/// Record names under `root`: the RECORDS file if present, else every *.hea, sorted.
std::vector<std::string> list_records(const std::filesystem::path& root);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

}  // namespace ehg
