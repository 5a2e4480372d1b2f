#include "ehg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "ehg/errors.hpp"
#include "ehg/parallel.hpp"
#include "ehg/text.hpp"

namespace ehg {

ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw ValidationError("confusion: " + std::to_string(y_true.size()) + " labels vs " +
                          std::to_string(y_pred.size()) + " predictions");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw ValidationError("confusion: entries must be 0 or 1");
    if (t == 1) {
      (p == 1 ? c.tp : c.fn)++;
    } else {
      (p == 1 ? c.fp : c.tn)++;
    }
  }
  return c;
}

MetricSet metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw ValidationError("metrics: no evaluated samples");
  MetricSet m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp > 0) {
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  } else {
    spdlog::debug("precision undefined (no positive predictions), reported as 0");
  }
  if (c.tp + c.fn > 0) {
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  } else {
    spdlog::debug("recall undefined (no positive labels), reported as 0");
  }
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

double metric_value(const MetricSet& m, std::size_t index) {
  switch (index) {
    case 0: return m.accuracy;
    case 1: return m.precision;
    case 2: return m.recall;
    case 3: return m.f1;
    case 4: return m.auc;
  }
  throw std::out_of_range("metric index");
}

namespace {

double& metric_ref(MetricSet& m, std::size_t index) {
  switch (index) {
    case 0: return m.accuracy;
    case 1: return m.precision;
    case 2: return m.recall;
    case 3: return m.f1;
    default: return m.auc;
  }
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> y) {
  if (scores.size() != y.size()) throw ValidationError("roc_auc: scores and labels differ in length");
  const std::size_t n = y.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (y[idx[k]] == 1) {
        rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("roc_auc: needs both classes");
  const double np = static_cast<double>(n_pos);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

std::vector<std::size_t> balanced_subsample(std::span<const int> labels, Rng& rng) {
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("balanced_subsample: labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) throw ValidationError("balanced_subsample: needs both classes");
  auto& minority = by_class[0].size() <= by_class[1].size() ? by_class[0] : by_class[1];
  auto& majority = &minority == &by_class[0] ? by_class[1] : by_class[0];

  // Partial Fisher-Yates: the first |minority| slots become a uniform draw.
  const std::size_t take = minority.size();
  for (std::size_t i = 0; i < take; ++i) std::swap(majority[i], majority[i + rng.below(majority.size() - i)]);

  std::vector<std::size_t> out(minority);
  out.insert(out.end(), majority.begin(), majority.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const int> labels, std::size_t k, Rng& rng) {
  if (k < 2) throw ValidationError("stratified_kfold: k must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw ValidationError("stratified_kfold: labels must be 0 or 1");
    by_class[labels[i]].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw ValidationError("stratified_kfold: class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) + " rows, fewer than k = " + std::to_string(k));
    }
  }
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t deal = 0;
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (auto row : members) folds[deal++ % k].push_back(row);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

void ExperimentPlan::validate() const {
  if (n_iterations < 1) throw ValidationError("evaluation: iterations must be >= 1");
  if (k_folds < 2) throw ValidationError("evaluation: folds must be >= 2");
}

std::uint64_t iteration_seed(std::uint64_t master_seed, std::size_t iteration) {
  return derive_seed(master_seed, iteration);
}

namespace {

std::string provenance_key(const LabeledDataset& d, std::size_t row) {
  if (d.provenance.empty()) return "#" + std::to_string(row);
  const auto& p = d.provenance[row];
  return p.record_name + '\x1f' + std::to_string(p.segment_index) + '\x1f' + p.window_kind;
}

void assert_disjoint(const LabeledDataset& d, const CellAudit& cell, bool grouped) {
  std::set<std::string> train;
  std::set<std::string> train_records;
  for (auto r : cell.train_rows) {
    train.insert(provenance_key(d, r));
    if (grouped) train_records.insert(d.provenance[r].record_name);
  }
  for (auto r : cell.eval_rows) {
    if (train.count(provenance_key(d, r)) || (grouped && train_records.count(d.provenance[r].record_name))) {
      throw LeakageError("iteration " + std::to_string(cell.iteration) + " fold " + std::to_string(cell.fold) +
                         ": scored row " + std::to_string(r) + " shares provenance with a training row");
    }
  }
}

std::vector<std::vector<std::size_t>> grouped_folds(const LabeledDataset& d, std::span<const std::size_t> rows,
                                                    std::size_t k, Rng& rng) {
  if (d.provenance.empty()) throw ValidationError("grouped_by_record needs row provenance");
  std::map<std::string, std::pair<int, std::vector<std::size_t>>> records;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& p = d.provenance[rows[i]];
    auto [it, inserted] = records.try_emplace(p.record_name, d.y[rows[i]], std::vector<std::size_t>{});
    if (!inserted && it->second.first != d.y[rows[i]]) {
      throw ValidationError("grouped_by_record: record " + p.record_name + " has mixed labels");
    }
    it->second.second.push_back(i);
  }
  std::vector<int> record_labels;
  std::vector<const std::vector<std::size_t>*> members;
  for (const auto& [name, entry] : records) {
    record_labels.push_back(entry.first);
    members.push_back(&entry.second);
  }
  auto record_folds = stratified_kfold(record_labels, k, rng);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    for (auto r : record_folds[f]) folds[f].insert(folds[f].end(), members[r]->begin(), members[r]->end());
    std::sort(folds[f].begin(), folds[f].end());
  }
  return folds;
}

}  // namespace

EvalReport run_experiment(const ExperimentPlan& plan, const LabeledDataset& data, std::span<const ModelSpec> specs,
                          const AuditHook& hook) {
  plan.validate();
  data.validate();
  if (specs.empty()) throw ValidationError("run_experiment: empty model list");
  for (const auto& s : specs) s.validate();

  EvalReport report;
  report.plan = plan;
  report.dataset_rows = data.rows();
  for (const auto& s : specs) report.model_names.push_back(s.display_name());
  {
    const auto [pos, neg] = class_counts(data.y);
    report.balanced_rows = 2 * std::min(pos, neg);
  }

  const std::size_t n_models = specs.size();
  std::vector<std::vector<CellResult>> per_iteration(plan.n_iterations);

  auto run_iteration = [&](std::size_t it) {
    const std::uint64_t seed = iteration_seed(plan.master_seed, it);
    Rng rng(seed);
    const auto rows = balanced_subsample(data.y, rng);
    std::vector<int> sub_labels;
    sub_labels.reserve(rows.size());
    for (auto r : rows) sub_labels.push_back(data.y[r]);
    const auto folds = plan.grouped_by_record ? grouped_folds(data, rows, plan.k_folds, rng)
                                              : stratified_kfold(sub_labels, plan.k_folds, rng);

    auto& out = per_iteration[it];
    for (std::size_t f = 0; f < plan.k_folds; ++f) {
      CellAudit cell;
      cell.iteration = it;
      cell.fold = f;
      for (std::size_t g = 0; g < plan.k_folds; ++g) {
        auto& dst = g == f ? cell.eval_rows : cell.train_rows;
        for (auto local : folds[g]) dst.push_back(rows[local]);
      }
      std::sort(cell.train_rows.begin(), cell.train_rows.end());
      assert_disjoint(data, cell, plan.grouped_by_record);
      if (hook) hook(cell);

      const auto train = data.subset(cell.train_rows);
      const auto eval = data.subset(cell.eval_rows);
      for (std::size_t m = 0; m < n_models; ++m) {
        ModelSpec spec = specs[m];
        spec.seed = derive_seed(seed ^ specs[m].seed, f * n_models + m);
        try {
          const auto model = fit(spec, train.x, train.y);
          const Eigen::VectorXd scores = model.predict_scores(eval.x);
          const auto labels = model.predict_labels(eval.x);
          CellResult res{it, f, m, metrics(confusion(eval.y, labels))};
          res.metrics.auc = roc_auc(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())), eval.y);
          out.push_back(res);
        } catch (const std::exception& e) {
          throw std::runtime_error("iteration " + std::to_string(it) + " fold " + std::to_string(f) + " model " +
                                   report.model_names[m] + ": " + e.what());
        }
      }
    }
  };

  parallel_for(plan.n_iterations, plan.jobs == 0 ? std::thread::hardware_concurrency() : plan.jobs, run_iteration);

  for (auto& cells : per_iteration) report.cells.insert(report.cells.end(), cells.begin(), cells.end());
  report.summary = summarize(report.cells, report.model_names);
  return report;
}

std::vector<ModelSummary> summarize(const std::vector<CellResult>& cells, const std::vector<std::string>& names) {
  std::vector<ModelSummary> out(names.size());
  std::vector<std::size_t> counts(names.size(), 0);
  for (std::size_t m = 0; m < names.size(); ++m) out[m].model = names[m];
  for (const auto& c : cells) {
    ++counts[c.model];
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) metric_ref(out[c.model].mean, k) += metric_value(c.metrics, k);
  }
  for (std::size_t m = 0; m < names.size(); ++m) {
    if (counts[m] == 0) continue;
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) metric_ref(out[m].mean, k) /= static_cast<double>(counts[m]);
  }
  for (const auto& c : cells) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      const double d = metric_value(c.metrics, k) - metric_value(out[c.model].mean, k);
      metric_ref(out[c.model].sd, k) += d * d;
    }
  }
  for (std::size_t m = 0; m < names.size(); ++m) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      auto& v = metric_ref(out[m].sd, k);
      v = counts[m] > 1 ? std::sqrt(v / static_cast<double>(counts[m] - 1)) : 0.0;
    }
  }
  return out;
}

namespace {

void write_plan_echo(std::ostream& os, const EvalReport& r) {
  const auto& p = r.plan;
  os << " iterations=" << p.n_iterations << " folds=" << p.k_folds << " master_seed=" << p.master_seed
     << " grouped_by_record=" << (p.grouped_by_record ? "true" : "false");
  if (!p.regime.empty()) os << " regime=" << p.regime;
  if (!p.channel_set.empty()) os << " channels=" << p.channel_set;
  os << " klt=" << (p.klt_enabled ? "on" : "off") << " rows=" << r.dataset_rows << " balanced_rows=" << r.balanced_rows
     << '\n';
}

}  // namespace

void write_report_csv(std::ostream& os, const EvalReport& r) {
  os << "# ehg-report v1";
  write_plan_echo(os, r);
  for (const auto& n : r.notes) os << "# note: " << n << '\n';
  os << "model,metric,mean,sd\n";
  for (const auto& s : r.summary) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      os << s.model << ',' << kMetricNames[k] << ',' << format_double(metric_value(s.mean, k)) << ','
         << format_double(metric_value(s.sd, k)) << '\n';
    }
  }
}

void write_cells_csv(std::ostream& os, const EvalReport& r) {
  os << "# ehg-cells v1";
  write_plan_echo(os, r);
  os << "iteration,fold,model,metric,value\n";
  for (const auto& c : r.cells) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      os << c.iteration << ',' << c.fold << ',' << r.model_names[c.model] << ',' << kMetricNames[k] << ','
         << format_double(metric_value(c.metrics, k)) << '\n';
    }
  }
}

void write_auc_plot_data(std::ostream& os, const EvalReport& r) {
  os << "# ehg-auc v1";
  write_plan_echo(os, r);
  os << "# index model auc_mean auc_sd\n";
  for (std::size_t m = 0; m < r.summary.size(); ++m) {
    os << m << ' ' << r.summary[m].model << ' ' << format_double(r.summary[m].mean.auc) << ' '
       << format_double(r.summary[m].sd.auc) << '\n';
  }
}

std::vector<ReportRow> read_report_csv(std::string_view content) {
  const auto lines = text::split_lines(content);
  std::vector<ReportRow> rows;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = text::trim(lines[i]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (i == 0 && line.find("ehg-report v1") == std::string_view::npos) {
        throw ParseError(1, "not an ehg-report v1 file");
      }
      continue;
    }
    if (!header_seen) {
      if (line != "model,metric,mean,sd") throw ParseError(i + 1, "expected header model,metric,mean,sd");
      header_seen = true;
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 4) throw ParseError(i + 1, "expected 4 cells");
    const auto mean = text::parse_number<double>(f[2]);
    const auto sd = text::parse_number<double>(f[3]);
    if (!mean || !sd) throw ParseError(i + 1, "invalid number");
    rows.push_back({std::string(f[0]), std::string(f[1]), *mean, *sd});
  }
  if (!header_seen) throw ParseError(lines.size(), "report has no header row");
  return rows;
}

}  // namespace ehg
