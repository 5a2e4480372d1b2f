#include "ehg/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include "ehg/errors.hpp"
#include "ehg/record_io.hpp"
#include "ehg/text.hpp"

namespace ehg {

std::string_view to_string(DatasetKind v) { return v == DatasetKind::Tpehgt ? "TPEHGT" : "TPEHG"; }
std::string_view to_string(SegmentationMode v) { return v == SegmentationMode::Annotated ? "annotated" : "fixed"; }
std::string_view to_string(ChannelSet v) { return v == ChannelSet::EhgOnly ? "ehg_only" : "ehg_plus_toco"; }
std::string_view to_string(KltScope v) { return v == KltScope::Segment ? "segment" : "record"; }
std::string_view to_string(AblatePreset v) { return v == AblatePreset::Tables ? "tables" : "grid"; }

namespace {

struct BadValue {
  std::string what;
};

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(std::string_view s) {
  auto v = text::parse_number<double>(s);
  if (!v || !std::isfinite(*v)) throw BadValue{"expected a number"};
  return *v;
}

std::size_t to_size(std::string_view s) {
  auto v = text::parse_number<std::size_t>(s);
  if (!v) throw BadValue{"expected a non-negative integer"};
  return *v;
}

std::uint64_t to_u64(std::string_view s) {
  auto v = text::parse_number<std::uint64_t>(s);
  if (!v) throw BadValue{"expected an unsigned 64-bit integer"};
  return *v;
}

bool to_bool(std::string_view s) {
  const auto l = text::to_lower(text::trim(s));
  if (l == "true" || l == "on" || l == "yes" || l == "1") return true;
  if (l == "false" || l == "off" || l == "no" || l == "0") return false;
  throw BadValue{"expected true/false or on/off"};
}

std::string on_off(bool b) { return b ? "on" : "off"; }
std::string tf(bool b) { return b ? "true" : "false"; }

std::vector<std::string> to_list(std::string_view s) {
  std::vector<std::string> out;
  if (text::trim(s).empty()) return out;
  for (auto item : text::split(s, ',')) {
    const auto t = text::trim(item);
    if (t.empty()) throw BadValue{"empty list item"};
    out.emplace_back(t);
  }
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + f(v[i]);
  return out;
}

template <typename E>
E to_enum(std::string_view s, std::initializer_list<E> options) {
  const auto l = text::to_lower(text::trim(s));
  std::string allowed;
  for (auto o : options) {
    if (l == text::to_lower(to_string(o))) return o;
    allowed += (allowed.empty() ? "" : " | ") + std::string(to_string(o));
  }
  throw BadValue{"expected one of " + allowed};
}

SegmentationMode to_segmentation(std::string_view s) {
  return to_enum(s, {SegmentationMode::Annotated, SegmentationMode::Fixed});
}

struct Key {
  std::string name;
  std::string doc;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<Key>& registry() {
  using C = PipelineConfig;
  using V = std::string_view;
  static const std::vector<Key> keys = {
      {"dataset.root", "directory holding the WFDB records (EHG_DATA_ROOT overrides)",
       [](C& c, V v) { c.dataset_root = std::string(text::trim(v)); }, [](const C& c) { return c.dataset_root.string(); }},
      {"dataset.kind", "TPEHGT | TPEHG",
       [](C& c, V v) { c.dataset_kind = to_enum(v, {DatasetKind::Tpehgt, DatasetKind::Tpehg}); },
       [](const C& c) { return std::string(to_string(c.dataset_kind)); }},
      {"dataset.annotations", "interval manifest CSV, relative to the root (annotated regime)",
       [](C& c, V v) { c.annotations = std::string(text::trim(v)); }, [](const C& c) { return c.annotations; }},
      {"dataset.group_index", "optional record,group CSV used when headers carry no group",
       [](C& c, V v) { c.group_index = std::string(text::trim(v)); }, [](const C& c) { return c.group_index; }},

      {"segmentation.mode", "annotated | fixed",
       [](C& c, V v) { c.segmentation = to_segmentation(v); },
       [](const C& c) { return std::string(to_string(c.segmentation)); }},
      {"segmentation.window_seconds", "fixed window length",
       [](C& c, V v) { c.window_seconds = to_double(v); }, [](const C& c) { return fmt(c.window_seconds); }},

      {"channels.set", "ehg_only | ehg_plus_toco",
       [](C& c, V v) { c.channel_set = to_enum(v, {ChannelSet::EhgOnly, ChannelSet::EhgPlusToco}); },
       [](const C& c) { return std::string(to_string(c.channel_set)); }},
      {"channels.prefiltered_marker", "label substring identifying channels filtered at acquisition",
       [](C& c, V v) { c.prefiltered_marker = std::string(text::trim(v)); },
       [](const C& c) { return c.prefiltered_marker; }},

      {"filter.order", "total Butterworth band-pass order (even)",
       [](C& c, V v) { c.filter_order = static_cast<int>(to_size(v)); },
       [](const C& c) { return std::to_string(c.filter_order); }},
      {"filter.low_hz", "lower cutoff", [](C& c, V v) { c.filter_low_hz = to_double(v); },
       [](const C& c) { return fmt(c.filter_low_hz); }},
      {"filter.high_hz", "upper cutoff", [](C& c, V v) { c.filter_high_hz = to_double(v); },
       [](const C& c) { return fmt(c.filter_high_hz); }},
      {"filter.use_prefiltered", "use channels already filtered at acquisition when present",
       [](C& c, V v) { c.use_prefiltered = to_bool(v); }, [](const C& c) { return tf(c.use_prefiltered); }},

      {"klt.enabled", "subspace denoising before feature extraction",
       [](C& c, V v) { c.klt_enabled = to_bool(v); }, [](const C& c) { return tf(c.klt_enabled); }},
      {"klt.lag", "autocorrelation lag L (Toeplitz size)", [](C& c, V v) { c.klt.lag = to_size(v); },
       [](const C& c) { return std::to_string(c.klt.lag); }},
      {"klt.jump_threshold", "relative log-eigenvalue jump that opens the signal subspace",
       [](C& c, V v) { c.klt.jump_threshold = to_double(v); }, [](const C& c) { return fmt(c.klt.jump_threshold); }},
      {"klt.scope", "segment | record",
       [](C& c, V v) { c.klt_scope = to_enum(v, {KltScope::Segment, KltScope::Record}); },
       [](const C& c) { return std::string(to_string(c.klt_scope)); }},

      {"psd.seg_len", "Welch segment length", [](C& c, V v) { c.features.psd.seg_len = to_size(v); },
       [](const C& c) { return std::to_string(c.features.psd.seg_len); }},
      {"psd.overlap", "Welch overlap fraction", [](C& c, V v) { c.features.psd.overlap = to_double(v); },
       [](const C& c) { return fmt(c.features.psd.overlap); }},

      {"pa.band", "full (0.08-5 Hz) | maternal_heart (1.0-2.2 Hz) | custom",
       [](C& c, V v) {
         const auto l = text::to_lower(text::trim(v));
         if (l != "full" && l != "maternal_heart" && l != "custom") {
           throw BadValue{"expected full | maternal_heart | custom"};
         }
         c.pa_band = l;
       },
       [](const C& c) { return c.pa_band; }},
      {"pa.f_low", "peak-amplitude band lower edge (custom band)",
       [](C& c, V v) { c.features.pa_low_hz = to_double(v); }, [](const C& c) { return fmt(c.features.pa_low_hz); }},
      {"pa.f_high", "peak-amplitude band upper edge (custom band)",
       [](C& c, V v) { c.features.pa_high_hz = to_double(v); }, [](const C& c) { return fmt(c.features.pa_high_hz); }},

      {"mfcc.n_filters", "Mel filters", [](C& c, V v) { c.features.mfcc.n_filters = to_size(v); },
       [](const C& c) { return std::to_string(c.features.mfcc.n_filters); }},
      {"mfcc.frame", "frame length in samples", [](C& c, V v) { c.features.mfcc.frame = to_size(v); },
       [](const C& c) { return std::to_string(c.features.mfcc.frame); }},
      {"mfcc.hop", "hop in samples", [](C& c, V v) { c.features.mfcc.hop = to_size(v); },
       [](const C& c) { return std::to_string(c.features.mfcc.hop); }},

      {"wavelet.levels", "db8 decomposition depth", [](C& c, V v) { c.features.wavelet_levels = to_size(v); },
       [](const C& c) { return std::to_string(c.features.wavelet_levels); }},

      {"models.list", "comma-separated: QDA, LR, SVM, DT, RF, GB, MLP, CB (boosting substitute)",
       [](C& c, V v) { c.model_list = to_list(v); },
       [](const C& c) { return join<std::string>(c.model_list, [](const std::string& s) { return s; }); }},
      {"models.qda.ridge", "ridge factor on trace(cov)/d", [](C& c, V v) { c.qda.ridge = to_double(v); },
       [](const C& c) { return fmt(c.qda.ridge); }},
      {"models.lr.c", "inverse L2 strength", [](C& c, V v) { c.lr.c = to_double(v); },
       [](const C& c) { return fmt(c.lr.c); }},
      {"models.lr.tolerance", "gradient-norm stop", [](C& c, V v) { c.lr.tolerance = to_double(v); },
       [](const C& c) { return fmt(c.lr.tolerance); }},
      {"models.lr.max_iterations", "gradient steps cap", [](C& c, V v) { c.lr.max_iterations = to_size(v); },
       [](const C& c) { return std::to_string(c.lr.max_iterations); }},
      {"models.svm.c", "hinge-loss weight", [](C& c, V v) { c.svm.c = to_double(v); },
       [](const C& c) { return fmt(c.svm.c); }},
      {"models.svm.iterations", "sub-gradient steps", [](C& c, V v) { c.svm.iterations = to_size(v); },
       [](const C& c) { return std::to_string(c.svm.iterations); }},
      {"models.dt.max_depth", "tree depth cap", [](C& c, V v) { c.dt.max_depth = to_size(v); },
       [](const C& c) { return std::to_string(c.dt.max_depth); }},
      {"models.dt.min_samples_split", "smallest node that may split",
       [](C& c, V v) { c.dt.min_samples_split = to_size(v); },
       [](const C& c) { return std::to_string(c.dt.min_samples_split); }},
      {"models.rf.n_estimators", "trees", [](C& c, V v) { c.rf.n_estimators = to_size(v); },
       [](const C& c) { return std::to_string(c.rf.n_estimators); }},
      {"models.rf.max_depth", "tree depth cap", [](C& c, V v) { c.rf.max_depth = to_size(v); },
       [](const C& c) { return std::to_string(c.rf.max_depth); }},
      {"models.rf.min_samples_split", "smallest node that may split",
       [](C& c, V v) { c.rf.min_samples_split = to_size(v); },
       [](const C& c) { return std::to_string(c.rf.min_samples_split); }},
      {"models.gb.n_estimators", "boosting rounds", [](C& c, V v) { c.gb.n_estimators = to_size(v); },
       [](const C& c) { return std::to_string(c.gb.n_estimators); }},
      {"models.gb.learning_rate", "shrinkage", [](C& c, V v) { c.gb.learning_rate = to_double(v); },
       [](const C& c) { return fmt(c.gb.learning_rate); }},
      {"models.gb.max_depth", "base learner depth", [](C& c, V v) { c.gb.max_depth = to_size(v); },
       [](const C& c) { return std::to_string(c.gb.max_depth); }},
      {"models.mlp.hidden_units", "ReLU units", [](C& c, V v) { c.mlp.hidden_units = to_size(v); },
       [](const C& c) { return std::to_string(c.mlp.hidden_units); }},
      {"models.mlp.learning_rate", "Adam step size", [](C& c, V v) { c.mlp.learning_rate = to_double(v); },
       [](const C& c) { return fmt(c.mlp.learning_rate); }},
      {"models.mlp.epochs", "passes over the training rows", [](C& c, V v) { c.mlp.epochs = to_size(v); },
       [](const C& c) { return std::to_string(c.mlp.epochs); }},
      {"models.mlp.batch_size", "minibatch rows", [](C& c, V v) { c.mlp.batch_size = to_size(v); },
       [](const C& c) { return std::to_string(c.mlp.batch_size); }},
      {"models.mlp.l2", "weight penalty", [](C& c, V v) { c.mlp.l2 = to_double(v); },
       [](const C& c) { return fmt(c.mlp.l2); }},

      {"evaluation.iterations", "balanced-subsample repetitions", [](C& c, V v) { c.iterations = to_size(v); },
       [](const C& c) { return std::to_string(c.iterations); }},
      {"evaluation.folds", "stratified folds", [](C& c, V v) { c.folds = to_size(v); },
       [](const C& c) { return std::to_string(c.folds); }},
      {"evaluation.master_seed", "root of every derived seed (--seed overrides)",
       [](C& c, V v) { c.master_seed = to_u64(v); }, [](const C& c) { return std::to_string(c.master_seed); }},
      {"evaluation.grouped_by_record", "keep all segments of a record in one fold",
       [](C& c, V v) { c.grouped_by_record = to_bool(v); }, [](const C& c) { return tf(c.grouped_by_record); }},
      {"evaluation.features", "feature CSV to evaluate; empty means <run.output_dir>/features.csv",
       [](C& c, V v) { c.features_file = std::string(text::trim(v)); }, [](const C& c) { return c.features_file; }},

      {"run.jobs", "worker threads, 0 = logical cores (--jobs overrides)", [](C& c, V v) { c.jobs = to_size(v); },
       [](const C& c) { return std::to_string(c.jobs); }},
      {"run.output_dir", "output directory (--out overrides)",
       [](C& c, V v) { c.output_dir = std::string(text::trim(v)); }, [](const C& c) { return c.output_dir.string(); }},
      {"run.failure_budget", "largest tolerated fraction of failed segments",
       [](C& c, V v) { c.failure_budget = to_double(v); }, [](const C& c) { return fmt(c.failure_budget); }},

      {"ablate.preset", "tables (the four reference cells) | grid (lists below)",
       [](C& c, V v) { c.ablate_preset = to_enum(v, {AblatePreset::Tables, AblatePreset::Grid}); },
       [](const C& c) { return std::string(to_string(c.ablate_preset)); }},
      {"ablate.klt", "grid values for klt, e.g. on,off",
       [](C& c, V v) {
         c.ablate_klt.clear();
         for (const auto& s : to_list(v)) c.ablate_klt.push_back(to_bool(s));
       },
       [](const C& c) { return join<bool>(c.ablate_klt, on_off); }},
      {"ablate.toco", "grid values for toco, e.g. on,off",
       [](C& c, V v) {
         c.ablate_toco.clear();
         for (const auto& s : to_list(v)) c.ablate_toco.push_back(to_bool(s));
       },
       [](const C& c) { return join<bool>(c.ablate_toco, on_off); }},
      {"ablate.segmentation", "grid values for segmentation; empty means segmentation.mode",
       [](C& c, V v) {
         c.ablate_segmentation.clear();
         for (const auto& s : to_list(v)) c.ablate_segmentation.push_back(to_segmentation(s));
       },
       [](const C& c) {
         return join<SegmentationMode>(c.ablate_segmentation,
                                       [](const SegmentationMode& m) { return std::string(to_string(m)); });
       }},
  };
  return keys;
}

void resolve_and_validate(PipelineConfig& c, const std::set<std::string>& explicit_keys) {
  auto fail = [](const std::string& what) { throw ValidationError("config: " + what); };

  if (c.pa_band != "custom") {
    const double lo = c.pa_band == "full" ? 0.08 : 1.0;
    const double hi = c.pa_band == "full" ? 5.0 : 2.2;
    if ((explicit_keys.count("pa.f_low") && c.features.pa_low_hz != lo) ||
        (explicit_keys.count("pa.f_high") && c.features.pa_high_hz != hi)) {
      fail("pa.f_low/pa.f_high conflict with pa.band = " + c.pa_band + "; use pa.band = custom");
    }
    c.features.pa_low_hz = lo;
    c.features.pa_high_hz = hi;
  }

  if (c.window_seconds <= 0.0) fail("segmentation.window_seconds must be > 0");
  if (c.filter_order < 2 || c.filter_order % 2 != 0) fail("filter.order must be even and >= 2");
  if (!(c.filter_low_hz > 0.0 && c.filter_low_hz < c.filter_high_hz)) fail("filter cutoffs must satisfy 0 < low < high");
  if (c.klt.lag < 2) fail("klt.lag must be >= 2");
  if (!(c.klt.jump_threshold > 0.0)) fail("klt.jump_threshold must be > 0");
  if (c.features.psd.seg_len < 2) fail("psd.seg_len must be >= 2");
  if (!(c.features.psd.overlap >= 0.0 && c.features.psd.overlap < 1.0)) fail("psd.overlap must be in [0, 1)");
  if (!(c.features.pa_low_hz >= 0.0 && c.features.pa_low_hz < c.features.pa_high_hz)) {
    fail("pa band must satisfy 0 <= f_low < f_high");
  }
  if (c.features.mfcc.n_filters < 1) fail("mfcc.n_filters must be >= 1");
  if (c.features.mfcc.frame < 2 || c.features.mfcc.hop < 1) fail("mfcc.frame must be >= 2 and mfcc.hop >= 1");
  if (c.features.mfcc.n_coeffs > c.features.mfcc.n_filters) fail("mfcc.n_filters must be >= 20");
  if (c.features.wavelet_levels < 1 || c.features.wavelet_levels > 20) fail("wavelet.levels must be in [1, 20]");
  if (c.iterations < 1) fail("evaluation.iterations must be >= 1");
  if (c.folds < 2) fail("evaluation.folds must be >= 2");
  if (!(c.failure_budget >= 0.0 && c.failure_budget <= 1.0)) fail("run.failure_budget must be in [0, 1]");
  if (c.ablate_klt.empty() || c.ablate_toco.empty()) fail("ablate.klt and ablate.toco need at least one value");
  if (c.model_list.empty()) fail("models.list is empty");

  std::set<std::string> seen;
  for (const auto& s : c.model_specs()) {
    if (!seen.insert(s.display_name()).second) fail("models.list names " + s.display_name() + " twice");
    s.validate();
  }
}

}  // namespace

std::vector<ModelSpec> PipelineConfig::model_specs() const {
  std::vector<ModelSpec> out;
  for (const auto& name : model_list) {
    const auto kind = parse_model_kind(name);
    const auto upper = text::to_lower(name);
    ModelSpec s = default_spec(kind, upper == "cb" || upper == "cb-substitute" ? "CB-substitute" : "");
    s.qda = qda;
    s.lr = lr;
    s.svm = svm;
    s.dt = dt;
    s.rf = rf;
    s.gb = gb;
    s.mlp = mlp;
    out.push_back(std::move(s));
  }
  return out;
}

ExperimentPlan PipelineConfig::experiment_plan() const {
  ExperimentPlan p;
  p.n_iterations = iterations;
  p.k_folds = folds;
  p.master_seed = master_seed;
  p.grouped_by_record = grouped_by_record;
  p.jobs = effective_jobs();
  p.regime = std::string(to_string(segmentation));
  p.channel_set = std::string(to_string(channel_set));
  p.klt_enabled = klt_enabled;
  return p;
}

std::filesystem::path PipelineConfig::features_path() const {
  return features_file.empty() ? output_dir / "features.csv" : std::filesystem::path(features_file);
}

std::size_t PipelineConfig::effective_jobs() const {
  return jobs != 0 ? jobs : std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

PipelineConfig parse_config(std::string_view content, std::optional<std::string> data_root_override) {
  std::map<std::string, const Key*> by_name;
  for (const auto& k : registry()) by_name[k.name] = &k;

  PipelineConfig c;
  std::set<std::string> explicit_keys;
  std::string section;
  const auto lines = text::split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    const std::size_t lineno = i + 1;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "unterminated section header");
      section = text::to_lower(text::trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ParseError(lineno, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(lineno, "expected key = value");
    const auto key = text::to_lower(text::trim(line.substr(0, eq)));
    if (key.empty()) throw ParseError(lineno, "missing key before '='");
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = by_name.find(full);
    if (it == by_name.end()) throw ParseError(lineno, "unknown key '" + full + "'");
    if (!explicit_keys.insert(full).second) throw ParseError(lineno, "duplicate key '" + full + "'");
    try {
      it->second->set(c, text::trim(line.substr(eq + 1)));
    } catch (const BadValue& e) {
      throw ParseError(lineno, full + ": " + e.what);
    } catch (const ValidationError& e) {
      throw ParseError(lineno, full + ": " + e.what());
    }
  }
  if (data_root_override && !data_root_override->empty()) c.dataset_root = *data_root_override;
  resolve_and_validate(c, explicit_keys);
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const std::string content = read_text_file(path);
  std::optional<std::string> env;
  if (const char* v = std::getenv("EHG_DATA_ROOT")) env = std::string(v);
  return parse_config(content, env);
}

namespace {

std::string render(const PipelineConfig* c) {
  std::string out;
  std::string section;
  for (const auto& k : registry()) {
    const auto dot = k.name.rfind('.');
    const std::string sec = k.name.substr(0, dot);
    if (sec != section) {
      out += (out.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    if (c) {
      out += k.name.substr(dot + 1) + " = " + k.get(*c) + "\n";
    } else {
      static const PipelineConfig defaults;
      out += "# " + k.doc + "\n" + k.name.substr(dot + 1) + " = " + k.get(defaults) + "\n";
    }
  }
  return out;
}

}  // namespace

std::string emit_config(const PipelineConfig& c) { return render(&c); }

std::string default_config_text() { return render(nullptr); }

void check_dataset_paths(const PipelineConfig& c, bool needs_annotations) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(c.dataset_root)) {
    throw ValidationError("dataset.root '" + c.dataset_root.string() + "' is not a directory");
  }
  if (needs_annotations && !fs::is_regular_file(c.dataset_root / c.annotations)) {
    throw ValidationError("annotation manifest '" + (c.dataset_root / c.annotations).string() + "' not found");
  }
  if (!c.group_index.empty() && !fs::is_regular_file(c.dataset_root / c.group_index)) {
    throw ValidationError("group index '" + (c.dataset_root / c.group_index).string() + "' not found");
  }
}

}  // namespace ehg
