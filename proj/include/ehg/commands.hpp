#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ehg/config.hpp"
#include "ehg/evaluation.hpp"
#include "ehg/pipeline.hpp"

namespace ehg {

struct CommandOptions {
  std::filesystem::path config_path;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> jobs;
  std::optional<std::filesystem::path> features;
};

/// Loads the config (or defaults), applies EHG_DATA_ROOT and the command-line overrides.
PipelineConfig resolve_config(const CommandOptions& opts);

struct IngestSummary {
  std::size_t records = 0;
  std::size_t preterm = 0;
  std::size_t term = 0;
  std::size_t skipped = 0;
  std::size_t annotations = 0;
};

/// Parses every record (and the manifest, for the annotated regime) and writes
/// <out>/ingest.csv with one row per usable record.
IngestSummary cmd_ingest(const PipelineConfig& config);

/// Writes <out>/features.csv, plus <out>/failures.csv when any segment failed.
FeatureRun cmd_features(const PipelineConfig& config);

/// Checks that a feature file matches what `config` would produce. Throws ValidationError.
void check_feature_schema(const FeatureFile& file, const PipelineConfig& config);

/// Reads the feature file, runs the protocol, writes report.csv, cells.csv and auc.dat
/// into the output directory.
EvalReport cmd_evaluate(const PipelineConfig& config);

struct AblationCell {
  SegmentationMode segmentation = SegmentationMode::Annotated;
  bool klt = true;
  bool toco = false;

  std::string name() const;
};

std::vector<AblationCell> ablation_cells(const PipelineConfig& config);

/// One feature extraction per (segmentation, klt) pair, one evaluation per cell, and a
/// merged <out>/ablation.csv keyed by (regime, klt, toco, model).
std::vector<std::pair<AblationCell, EvalReport>> cmd_ablate(const PipelineConfig& config);

/// Renders report.csv and ablation.csv found in the output directory as text tables,
/// writes them to <out>/summary.txt and to `os`.
void cmd_report(const PipelineConfig& config, std::ostream& os);

/// Drops the columns of TOCO channels (the trailing channels) from a feature run.
LabeledDataset drop_trailing_channels(const LabeledDataset& data, std::size_t keep_channels,
                                      std::size_t per_channel);

}  // namespace ehg
