#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ehg/classifiers.hpp"
#include "ehg/evaluation.hpp"
#include "ehg/features.hpp"
#include "ehg/klt.hpp"

namespace ehg {

enum class DatasetKind { Tpehgt, Tpehg };
enum class SegmentationMode { Annotated, Fixed };
enum class ChannelSet { EhgOnly, EhgPlusToco };
enum class KltScope { Segment, Record };
enum class AblatePreset { Tables, Grid };

std::string_view to_string(DatasetKind v);
std::string_view to_string(SegmentationMode v);
std::string_view to_string(ChannelSet v);
std::string_view to_string(KltScope v);
std::string_view to_string(AblatePreset v);

struct PipelineConfig {
  // [dataset]
  std::filesystem::path dataset_root = ".";
  DatasetKind dataset_kind = DatasetKind::Tpehgt;
  std::string annotations = "annotations.csv";  // relative to the dataset root
  std::string group_index;                      // optional record,group CSV, relative to the root

  // [segmentation]
  SegmentationMode segmentation = SegmentationMode::Annotated;
  double window_seconds = 180.0;

  // [channels]
  ChannelSet channel_set = ChannelSet::EhgOnly;
  std::string prefiltered_marker = "0.08-5";  // label substring of channels filtered at acquisition

  // [filter]
  int filter_order = 4;
  double filter_low_hz = 0.08;
  double filter_high_hz = 5.0;
  bool use_prefiltered = true;

  // [klt]
  bool klt_enabled = true;
  KltOptions klt;
  KltScope klt_scope = KltScope::Segment;

  // [psd] [pa] [mfcc] [wavelet]
  std::string pa_band = "full";  // full | maternal_heart | custom
  FeatureOptions features;

  // [models] and [models.<kind>]
  std::vector<std::string> model_list = {"QDA", "LR", "SVM", "DT", "RF", "GB", "MLP", "CB"};
  QdaParams qda;
  LogisticParams lr;
  SvmParams svm;
  TreeParams dt;
  ForestParams rf;
  BoostingParams gb;
  MlpParams mlp;

  // [evaluation]
  std::size_t iterations = 20;
  std::size_t folds = 5;
  std::uint64_t master_seed = 42;
  bool grouped_by_record = false;
  std::string features_file;  // empty: <output_dir>/features.csv

  // [run]
  std::size_t jobs = 0;  // 0: one worker per logical core
  std::filesystem::path output_dir = "out";
  double failure_budget = 0.01;

  // [ablate]
  AblatePreset ablate_preset = AblatePreset::Tables;
  std::vector<bool> ablate_klt = {true, false};
  std::vector<bool> ablate_toco = {true, false};
  std::vector<SegmentationMode> ablate_segmentation;  // empty: the configured segmentation

  /// Model specs in list order; "CB" becomes the boosting substitute labelled "CB-substitute".
  std::vector<ModelSpec> model_specs() const;
  ExperimentPlan experiment_plan() const;
  std::filesystem::path features_path() const;
  std::size_t effective_jobs() const;
};

/// Parses `[section]` headers and `key = value` lines; '#' and ';' start comment lines.
/// Unknown keys, duplicate keys and malformed values are ParseErrors carrying the line.
/// Keys absent from the text keep their defaults. `data_root_override` (normally
/// EHG_DATA_ROOT) replaces dataset.root when set.
PipelineConfig parse_config(std::string_view text, std::optional<std::string> data_root_override = std::nullopt);

/// Reads a config file and applies EHG_DATA_ROOT from the environment.
PipelineConfig load_config(const std::filesystem::path& path);

/// Effective configuration with every key spelled out; parse_config(emit_config(c)) == c.
std::string emit_config(const PipelineConfig& c);

/// Documented defaults, one comment line per key.
std::string default_config_text();

/// Paths the dataset-reading commands need: the root, and the annotation manifest for
/// the annotated regime. Throws ValidationError naming the first missing path.
void check_dataset_paths(const PipelineConfig& c, bool needs_annotations);

}  // namespace ehg
