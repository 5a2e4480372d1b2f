#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ehg/classifiers.hpp"
#include "ehg/dataset.hpp"
#include "ehg/random.hpp"

namespace ehg {

struct ConfusionCounts {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::size_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Positive class is 1 (preterm).
ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
};

inline constexpr std::array<std::string_view, 5> kMetricNames = {"accuracy", "precision", "recall", "f1", "auc"};
double metric_value(const MetricSet& m, std::size_t index);

/// Accuracy, precision, recall and F1 from counts; auc is left at 0. Precision or
/// recall with a zero denominator is reported as 0, and F1 is 0 when both are.
MetricSet metrics(const ConfusionCounts& c);

/// Mann-Whitney form with averaged ranks for ties. Throws UndefinedMetricError
/// unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> y_true);

/// Every minority row plus an equal-size uniform draw (without replacement) from the
/// majority class. Indices are returned in ascending order.
std::vector<std::size_t> balanced_subsample(std::span<const int> labels, Rng& rng);

/// k disjoint folds covering every row. Each class is shuffled and dealt round-robin,
/// the dealing position carrying over from one class to the next so fold sizes differ
/// by at most one. Indices within a fold are ascending.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k, Rng& rng);

struct ExperimentPlan {
  std::size_t n_iterations = 20;
  std::size_t k_folds = 5;
  std::uint64_t master_seed = 42;
  bool grouped_by_record = false;
  std::size_t jobs = 1;
  // Echoed into the report.
  std::string regime;
  std::string channel_set;
  bool klt_enabled = true;

  void validate() const;
};

/// seed_i for iteration i.
std::uint64_t iteration_seed(std::uint64_t master_seed, std::size_t iteration);

struct CellResult {
  std::size_t iteration = 0;
  std::size_t fold = 0;
  std::size_t model = 0;  // index into EvalReport::model_names
  MetricSet metrics;
};

struct ModelSummary {
  std::string model;
  MetricSet mean;
  MetricSet sd;  // sample standard deviation over cells
};

struct EvalReport {
  ExperimentPlan plan;
  std::vector<std::string> model_names;
  std::vector<CellResult> cells;  // ordered by (iteration, fold, model)
  std::vector<ModelSummary> summary;
  std::size_t dataset_rows = 0;
  std::size_t balanced_rows = 0;  // per iteration
  std::vector<std::string> notes;  // free text, written as '#' lines after the report header
};

/// What the harness used for one (iteration, fold) cell, exposed for auditing.
struct CellAudit {
  std::size_t iteration = 0;
  std::size_t fold = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> eval_rows;
};

using AuditHook = std::function<void(const CellAudit&)>;

/// Balanced subsampling, then stratified k-fold, then one fit per (fold, model) on the
/// training rows only. The disjointness of train and scored provenance is asserted on
/// every cell and a violation throws LeakageError. `hook`, when given, is called once per
/// cell from the worker thread that ran it.
EvalReport run_experiment(const ExperimentPlan& plan, const LabeledDataset& data, std::span<const ModelSpec> specs,
                          const AuditHook& hook = {});

std::vector<ModelSummary> summarize(const std::vector<CellResult>& cells, const std::vector<std::string>& model_names);

void write_report_csv(std::ostream& os, const EvalReport& r);
void write_cells_csv(std::ostream& os, const EvalReport& r);
/// Whitespace-delimited per-model AUC (index, model, mean, sd) with a '#' header.
void write_auc_plot_data(std::ostream& os, const EvalReport& r);

struct ReportRow {
  std::string model;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
};

std::vector<ReportRow> read_report_csv(std::string_view text);

}  // namespace ehg
