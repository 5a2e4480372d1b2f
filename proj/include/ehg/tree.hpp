#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ehg/binary_io.hpp"

namespace ehg {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  std::size_t leaf_of(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const { return nodes[leaf_of(row)].value; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  void write(ByteWriter& w) const;
  static RegressionTree read(ByteReader& r, std::size_t n_features);
};

enum class SplitCriterion { Gini, SquaredError };

struct TreeGrowOptions {
  SplitCriterion criterion = SplitCriterion::Gini;
  std::size_t max_depth = 100;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0 = all features at every split
  std::uint64_t seed = 0;        // feature sampling order when max_features > 0
};

/// CART growth on weighted rows. Rows with zero weight are ignored, so bootstrap
/// multiplicities can be passed straight in as weights. For Gini the target must be
/// 0/1 and leaves hold the weighted class-1 fraction; for squared error leaves hold
/// the weighted mean target.
RegressionTree grow_tree(const Eigen::MatrixXd& x, std::span<const double> target, std::span<const double> weight,
                         const TreeGrowOptions& opts);

}  // namespace ehg
