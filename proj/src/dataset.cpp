#include "ehg/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "ehg/errors.hpp"
#include "ehg/text.hpp"

namespace ehg {

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> row_indices) const {
  LabeledDataset out;
  out.feature_names = feature_names;
  out.x.resize(static_cast<Eigen::Index>(row_indices.size()), x.cols());
  out.y.reserve(row_indices.size());
  out.provenance.reserve(row_indices.size());
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const std::size_t r = row_indices[i];
    if (r >= rows()) throw ValidationError("subset row index out of range");
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(r));
    out.y.push_back(y[r]);
    if (!provenance.empty()) out.provenance.push_back(provenance[r]);
  }
  return out;
}

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ValidationError("feature rows and labels disagree");
  if (!provenance.empty() && provenance.size() != y.size()) throw ValidationError("provenance rows and labels disagree");
  if (!feature_names.empty() && feature_names.size() != features()) {
    throw ValidationError("feature names and columns disagree");
  }
  for (int label : y) {
    if (label != 0 && label != 1) throw ValidationError("labels must be 0 or 1");
  }
  if (!x.allFinite()) throw ValidationError("feature matrix contains NaN or Inf");
}

std::pair<std::size_t, std::size_t> class_counts(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int v : labels) pos += v == 1 ? 1 : 0;
  return {pos, labels.size() - pos};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_feature_csv(std::ostream& os, const LabeledDataset& data, std::string_view schema_note) {
  data.validate();
  os << '#' << kFeatureSchemaTag;
  if (!schema_note.empty()) os << ' ' << schema_note;
  os << '\n' << "record,segment_index,window_kind";
  for (const auto& name : data.feature_names) os << ',' << name;
  os << ",label\n";
  for (std::size_t r = 0; r < data.rows(); ++r) {
    const auto& p = data.provenance.at(r);
    os << p.record_name << ',' << p.segment_index << ',' << p.window_kind;
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) os << ',' << format_double(data.x(static_cast<Eigen::Index>(r), c));
    os << ',' << data.y[r] << '\n';
  }
}

FeatureFile read_feature_csv(std::string_view content) {
  const auto lines = text::split_lines(content);
  FeatureFile out;
  std::size_t i = 0;
  if (i < lines.size() && !lines[i].empty() && lines[i].front() == '#') {
    const auto body = text::trim(lines[i].substr(1));
    if (body.substr(0, kFeatureSchemaTag.size()) != kFeatureSchemaTag) {
      throw ParseError(1, "unknown feature file schema '" + std::string(body) + "'");
    }
    out.schema_note = std::string(text::trim(body.substr(kFeatureSchemaTag.size())));
    ++i;
  }
  if (i >= lines.size()) throw ParseError(i + 1, "feature file has no header row");

  const auto header = text::split(lines[i], ',');
  if (header.size() < 5 || header[0] != "record" || header[1] != "segment_index" ||
      header[2] != "window_kind" || header.back() != "label") {
    throw ParseError(i + 1, "feature header must be record,segment_index,window_kind,<features>,label");
  }
  const std::size_t n_features = header.size() - 4;
  for (std::size_t c = 3; c + 1 < header.size(); ++c) out.data.feature_names.emplace_back(header[c]);
  ++i;

  std::vector<std::vector<double>> rows;
  for (; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (text::trim(line).empty()) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != header.size()) {
      throw ParseError(i + 1, "expected " + std::to_string(header.size()) + " cells, found " +
                                  std::to_string(fields.size()));
    }
    Provenance p;
    p.record_name = std::string(fields[0]);
    const auto seg = text::parse_number<std::size_t>(fields[1]);
    if (!seg) throw ParseError(i + 1, "invalid segment_index");
    p.segment_index = *seg;
    p.window_kind = std::string(fields[2]);
    std::vector<double> row(n_features);
    for (std::size_t c = 0; c < n_features; ++c) {
      const auto v = text::parse_number<double>(fields[3 + c]);
      if (!v) throw ParseError(i + 1, "invalid value in column " + std::string(header[3 + c]));
      row[c] = *v;
    }
    const auto label = text::parse_number<int>(fields.back());
    if (!label || (*label != 0 && *label != 1)) throw ParseError(i + 1, "label must be 0 or 1");
    out.data.provenance.push_back(std::move(p));
    out.data.y.push_back(*label);
    rows.push_back(std::move(row));
  }

  out.data.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_features));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < n_features; ++c) {
      out.data.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  out.data.validate();
  return out;
}

}  // namespace ehg
