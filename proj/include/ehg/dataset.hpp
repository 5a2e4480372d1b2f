#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ehg {

struct Provenance {
  std::string record_name;
  std::size_t segment_index = 0;
  std::string window_kind;

  friend bool operator==(const Provenance&, const Provenance&) = default;
  friend auto operator<=>(const Provenance& a, const Provenance& b) {
    if (auto c = a.record_name <=> b.record_name; c != 0) return c;
    return a.segment_index <=> b.segment_index;
  }
};

/// Feature matrix with binary labels (1 = preterm, 0 = term) and per-row provenance.
struct LabeledDataset {
  Eigen::MatrixXd x;
  std::vector<int> y;
  std::vector<Provenance> provenance;
  std::vector<std::string> feature_names;

  std::size_t rows() const { return y.size(); }
  std::size_t features() const { return static_cast<std::size_t>(x.cols()); }

  LabeledDataset subset(std::span<const std::size_t> row_indices) const;

  /// Row counts agree, labels are binary, no NaN/Inf.
  void validate() const;
};

/// Number of rows with label 1 and label 0.
std::pair<std::size_t, std::size_t> class_counts(std::span<const int> labels);

inline constexpr std::string_view kFeatureSchemaTag = "ehg-features v1";

/// CSV: one `#` schema line, then `record,segment_index,window_kind,<features...>,label`.
void write_feature_csv(std::ostream& os, const LabeledDataset& data, std::string_view schema_note);

struct FeatureFile {
  LabeledDataset data;
  std::string schema_note;  // text after the schema tag on the comment line
};

FeatureFile read_feature_csv(std::string_view text);

/// Round-trip-exact decimal formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace ehg
