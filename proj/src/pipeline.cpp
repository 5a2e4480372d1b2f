#include "ehg/pipeline.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ehg/errors.hpp"
#include "ehg/features.hpp"
#include "ehg/klt.hpp"
#include "ehg/parallel.hpp"
#include "ehg/text.hpp"

namespace ehg {

LoadedDataset load_dataset(const PipelineConfig& config) {
  const bool annotated = config.segmentation == SegmentationMode::Annotated;
  check_dataset_paths(config, annotated);
  const auto& root = config.dataset_root;

  std::map<std::string, Group> index;
  if (!config.group_index.empty()) index = load_group_index(read_text_file(root / config.group_index));

  LoadedDataset out;
  for (const auto& name : list_records(root)) {
    Record rec = load_record(root / (name + ".hea"), index);
    if (rec.group == Group::Nonpregnant) {
      out.skipped.push_back(name + ": non-pregnant");
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const Record& a, const Record& b) { return a.header.record_name < b.header.record_name; });
  if (out.records.empty()) throw ValidationError("no usable records under " + root.string());

  if (annotated) {
    out.annotations = load_annotations(read_text_file(root / config.annotations));
    std::map<std::string, std::size_t> lengths;
    for (const auto& r : out.records) lengths[r.header.record_name] = r.header.n_samples;
    for (const auto& [name, n] : lengths) validate_annotation_bounds(out.annotations, name, n);
  }
  return out;
}

ChannelSelection select_channels(const Record& record, const PipelineConfig& config) {
  const auto& channels = record.header.channels;
  const auto marker = text::to_lower(config.prefiltered_marker);
  auto prefiltered = [&](std::size_t c) {
    return !marker.empty() && text::to_lower(channels[c].label).find(marker) != std::string::npos;
  };
  // TPEHG also ships copies filtered to other bands (S1_DOCFILT-4-0.3-3 and so on);
  // none of those count as raw
  auto filtered_any_band = [&](std::size_t c) {
    return prefiltered(c) || text::to_lower(channels[c].label).find("filt") != std::string::npos;
  };
  bool any_prefiltered = false;
  for (std::size_t c = 0; c < channels.size(); ++c) any_prefiltered = any_prefiltered || prefiltered(c);
  const bool use_pre = config.use_prefiltered && any_prefiltered;

  ChannelSelection sel;
  sel.needs_filter = !use_pre;
  std::vector<std::size_t> toco;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (use_pre ? !prefiltered(c) : filtered_any_band(c)) continue;
    if (role_from_label(channels[c].label) == ChannelRole::Toco) {
      toco.push_back(c);
    } else {
      sel.indices.push_back(c);
      sel.roles.push_back(ChannelRole::Ehg);
    }
  }
  if (sel.indices.empty()) throw ValidationError("record " + record.header.record_name + " has no EHG channels");
  if (config.channel_set == ChannelSet::EhgPlusToco) {
    if (toco.empty()) {
      throw ValidationError("record " + record.header.record_name + " has no TOCO channel but channels.set = ehg_plus_toco");
    }
    for (auto c : toco) {
      sel.indices.push_back(c);
      sel.roles.push_back(ChannelRole::Toco);
    }
  }
  return sel;
}

Record prepare_record(const Record& record, const PipelineConfig& config) {
  const auto sel = select_channels(record, config);
  Record out;
  out.header = record.header;
  out.group = record.group;
  out.gestation_at_delivery_weeks = record.gestation_at_delivery_weeks;
  out.header.channels.clear();
  const double fs = record.header.sampling_rate_hz;

  std::optional<BandpassFilter> filter;
  if (sel.needs_filter) {
    filter = design_butterworth_bandpass(config.filter_order, config.filter_low_hz, config.filter_high_hz, fs);
  }
  for (std::size_t k = 0; k < sel.indices.size(); ++k) {
    const auto c = sel.indices[k];
    out.header.channels.push_back(record.header.channels[c]);
    std::vector<double> x = filter ? apply_zero_phase(*filter, record.signals[c]) : record.signals[c];
    if (config.klt_enabled && config.klt_scope == KltScope::Record) x = denoise(x, config.klt);
    out.signals.push_back(std::move(x));
  }
  out.header.n_channels = sel.indices.size();
  out.channel_roles = sel.roles;
  return out;
}

std::vector<Segment> segment_record(const Record& prepared, const PipelineConfig& config,
                                    std::span<const IntervalAnnotation> annotations) {
  if (config.segmentation == SegmentationMode::Fixed) return segment_fixed(prepared, config.window_seconds);
  std::vector<IntervalAnnotation> mine;
  for (const auto& a : annotations) {
    if (a.record_name == prepared.header.record_name) mine.push_back(a);
  }
  return segment_annotated(prepared, mine);
}

SegmentRow segment_feature_row(const Segment& segment, double fs, const PipelineConfig& config) {
  SegmentRow row;
  row.values.reserve(segment.channels.size() * features_per_channel(config.features));
  for (const auto& channel : segment.channels) {
    std::vector<double> x = channel;
    if (config.klt_enabled && config.klt_scope == KltScope::Segment) x = denoise(x, config.klt);
    const auto f = channel_features(x, fs, config.features);
    row.values.insert(row.values.end(), f.values.begin(), f.values.end());
    row.undefined_pa += f.pa_undefined ? 1 : 0;
  }
  return row;
}

std::string feature_schema_note(const PipelineConfig& c, std::size_t n_channels) {
  std::ostringstream os;
  os << "kind=" << to_string(c.dataset_kind) << " segmentation=" << to_string(c.segmentation)
     << " channels=" << to_string(c.channel_set) << " n_channels=" << n_channels
     << " klt=" << (c.klt_enabled ? "on" : "off") << " per_channel=" << features_per_channel(c.features);
  return os.str();
}

std::vector<std::string> feature_names(const PipelineConfig& config, std::size_t n_channels) {
  std::vector<std::string> names;
  for (std::size_t ch = 1; ch <= n_channels; ++ch) {
    auto part = channel_feature_names(ch, config.features);
    names.insert(names.end(), part.begin(), part.end());
  }
  return names;
}

namespace {

int label_of(Group g) { return g == Group::Preterm ? 1 : 0; }

std::string window_kind_name(const Segment& s) { return std::string(to_string(s.window_kind)); }

}  // namespace

FeatureRun extract_features(const LoadedDataset& dataset, const PipelineConfig& config) {
  const std::size_t jobs = config.effective_jobs();

  // Record-level work (filtering, optional whole-record KLT) runs in parallel as well.
  std::vector<Record> prepared(dataset.records.size());
  parallel_for(dataset.records.size(), jobs, [&](std::size_t i) {
    try {
      prepared[i] = prepare_record(dataset.records[i], config);
    } catch (const std::exception& e) {
      throw ValidationError("record " + dataset.records[i].header.record_name + ": " + e.what());
    }
  });

  FeatureRun run;
  run.n_channels = prepared.front().signals.size();
  run.channel_roles = prepared.front().channel_roles;
  for (const auto& r : prepared) {
    if (r.signals.size() != run.n_channels) {
      throw ValidationError("record " + r.header.record_name + " yields " + std::to_string(r.signals.size()) +
                            " channels, expected " + std::to_string(run.n_channels));
    }
  }

  struct Job {
    const Record* record;
    Segment segment;
  };
  std::vector<Job> work;
  for (const auto& r : prepared) {
    auto segs = segment_record(r, config, dataset.annotations);
    if (segs.empty()) spdlog::warn("record {} produced no segments", r.header.record_name);
    for (auto& s : segs) work.push_back({&r, std::move(s)});
  }
  run.n_segments = work.size();
  if (work.empty()) throw ValidationError("no segments to extract features from");

  std::vector<std::optional<SegmentRow>> rows(work.size());
  std::vector<std::string> errors(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    try {
      rows[i] = segment_feature_row(work[i].segment, work[i].record->header.sampling_rate_hz, config);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  const std::size_t width = run.n_channels * features_per_channel(config.features);
  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const auto& seg = work[i].segment;
    Provenance p{seg.record_name, seg.segment_index, window_kind_name(seg)};
    if (rows[i]) {
      ok.push_back(i);
      run.undefined_pa += rows[i]->undefined_pa;
    } else {
      spdlog::warn("segment {}#{} failed: {}", p.record_name, p.segment_index, errors[i]);
      run.failures.push_back({std::move(p), errors[i]});
    }
  }
  if (run.undefined_pa > 0) {
    spdlog::warn("{} channel segment(s) had no power in the PA band; PA recorded as 0", run.undefined_pa);
  }
  const double failed_fraction = static_cast<double>(run.failures.size()) / static_cast<double>(work.size());
  if (failed_fraction > config.failure_budget) {
    throw std::runtime_error(std::to_string(run.failures.size()) + " of " + std::to_string(work.size()) +
                             " segments failed, above the failure budget; first: " + run.failures.front().provenance.record_name +
                             "#" + std::to_string(run.failures.front().provenance.segment_index) + ": " +
                             run.failures.front().error);
  }

  auto& d = run.data;
  d.feature_names = feature_names(config, run.n_channels);
  d.x.resize(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < ok.size(); ++r) {
    const auto& job = work[ok[r]];
    const auto& values = rows[ok[r]]->values;
    for (std::size_t c = 0; c < width; ++c) d.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[c];
    d.y.push_back(label_of(job.segment.label));
    d.provenance.push_back({job.segment.record_name, job.segment.segment_index, window_kind_name(job.segment)});
  }
  d.validate();
  run.schema_note = feature_schema_note(config, run.n_channels);
  return run;
}

}  // namespace ehg
