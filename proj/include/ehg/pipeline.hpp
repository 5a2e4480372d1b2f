#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ehg/config.hpp"
#include "ehg/dataset.hpp"
#include "ehg/preprocess.hpp"
#include "ehg/record_io.hpp"

namespace ehg {

struct LoadedDataset {
  std::vector<Record> records;  // sorted by name; non-pregnant records are left out
  std::vector<IntervalAnnotation> annotations;
  std::vector<std::string> skipped;  // record names left out, with the reason
};

/// Reads every record under the configured root, resolves groups and, for the annotated
/// regime, loads and bounds-checks the interval manifest.
LoadedDataset load_dataset(const PipelineConfig& config);

struct ChannelSelection {
  std::vector<std::size_t> indices;  // EHG channels in header order, then TOCO when requested
  std::vector<ChannelRole> roles;
  bool needs_filter = false;  // raw channels picked; the band-pass is applied here
};

/// Uses the acquisition-filtered channels (label contains the configured marker) when
/// present and allowed, otherwise the raw channels.
ChannelSelection select_channels(const Record& record, const PipelineConfig& config);

/// Selected channels after filtering and, with klt.scope = record, whole-record KLT.
Record prepare_record(const Record& record, const PipelineConfig& config);

/// Segments of a prepared record under the configured regime.
std::vector<Segment> segment_record(const Record& prepared, const PipelineConfig& config,
                                    std::span<const IntervalAnnotation> annotations);

/// Feature row of one segment: per-segment KLT (when configured) then 57 values per
/// channel, channel-major.
struct SegmentRow {
  std::vector<double> values;
  std::size_t undefined_pa = 0;  // channels whose PA band carried no power (recorded as 0)
};

SegmentRow segment_feature_row(const Segment& segment, double fs, const PipelineConfig& config);

struct SegmentFailure {
  Provenance provenance;
  std::string error;
};

struct FeatureRun {
  LabeledDataset data;
  std::vector<SegmentFailure> failures;
  std::size_t n_segments = 0;
  std::size_t n_channels = 0;
  std::vector<ChannelRole> channel_roles;
  std::size_t undefined_pa = 0;  // channel-segments whose PA band had no power
  std::string schema_note;
};

/// Schema note written after the feature-file tag; evaluate checks it against the config.
std::string feature_schema_note(const PipelineConfig& config, std::size_t n_channels);

/// Column names for `n_channels` channels.
std::vector<std::string> feature_names(const PipelineConfig& config, std::size_t n_channels);

/// Extracts features for every segment on config.effective_jobs() workers. Rows come out
/// ordered by (record, segment index). Segment failures are collected; more than
/// run.failure_budget of them throws.
FeatureRun extract_features(const LoadedDataset& dataset, const PipelineConfig& config);

}  // namespace ehg
