#include <cmath>

#include "ehg/classifiers.hpp"
#include "ehg/random.hpp"

namespace ehg::models {

namespace {

std::vector<double> labels_as_target(std::span<const int> y) { return {y.begin(), y.end()}; }

}  // namespace

TreeState fit_tree(const Eigen::MatrixXd& x, std::span<const int> y, const TreeParams& p) {
  const auto target = labels_as_target(y);
  const std::vector<double> weight(y.size(), 1.0);
  TreeGrowOptions opts;
  opts.criterion = SplitCriterion::Gini;
  opts.max_depth = p.max_depth;
  opts.min_samples_split = p.min_samples_split;
  return {grow_tree(x, target, weight, opts)};
}

ForestState fit_forest(const Eigen::MatrixXd& x, std::span<const int> y, const ForestParams& p, std::uint64_t seed) {
  const auto target = labels_as_target(y);
  const std::size_t n = y.size();
  const auto d = static_cast<std::size_t>(x.cols());

  TreeGrowOptions opts;
  opts.criterion = SplitCriterion::Gini;
  opts.max_depth = p.max_depth;
  opts.min_samples_split = p.min_samples_split;
  opts.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));

  ForestState s;
  s.trees.reserve(p.n_estimators);
  std::vector<double> weight(n);
  for (std::size_t t = 0; t < p.n_estimators; ++t) {
    Rng rng(derive_seed(seed, t));
    std::fill(weight.begin(), weight.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) weight[rng.below(n)] += 1.0;
    opts.seed = rng.next();
    s.trees.push_back(grow_tree(x, target, weight, opts));
  }
  return s;
}

}  // namespace ehg::models
