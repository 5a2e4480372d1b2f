#include <cmath>

#include "ehg/classifiers.hpp"
#include "ehg/errors.hpp"

namespace ehg::models {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double mean_logloss(const Eigen::VectorXd& f, std::span<const int> y) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) s += softplus(f(i)) - y[static_cast<std::size_t>(i)] * f(i);
  return s / static_cast<double>(f.size());
}

}  // namespace

// Each round fits a squared-error tree to the residual y - p, then replaces the
// leaf values with one Newton step sum(r) / sum(p (1 - p)).
BoostingState fit_boosting(const Eigen::MatrixXd& x, std::span<const int> y, const BoostingParams& p) {
  const auto n = static_cast<std::size_t>(x.rows());
  double pos = 0.0;
  for (int v : y) pos += v;
  const double prior = pos / static_cast<double>(n);
  if (prior <= 0.0 || prior >= 1.0) throw UnfittableError("boosting needs both classes");

  BoostingState s;
  s.initial_logit = std::log(prior / (1.0 - prior));
  s.learning_rate = p.learning_rate;
  Eigen::VectorXd f = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), s.initial_logit);
  s.training_loss.push_back(mean_logloss(f, y));

  TreeGrowOptions opts;
  opts.criterion = SplitCriterion::SquaredError;
  opts.max_depth = p.max_depth;
  const std::vector<double> weight(n, 1.0);
  std::vector<double> resid(n), hess(n);
  std::vector<std::size_t> leaf(n);

  for (std::size_t round = 0; round < p.n_estimators; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double pi = 1.0 / (1.0 + std::exp(-f(static_cast<Eigen::Index>(i))));
      resid[i] = y[i] - pi;
      hess[i] = pi * (1.0 - pi);
    }
    RegressionTree tree = grow_tree(x, resid, weight, opts);

    std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      leaf[i] = tree.leaf_of(x.row(static_cast<Eigen::Index>(i)));
      num[leaf[i]] += resid[i];
      den[leaf[i]] += hess[i];
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].feature < 0) tree.nodes[k].value = std::abs(den[k]) < 1e-150 ? 0.0 : num[k] / den[k];
    }
    for (std::size_t i = 0; i < n; ++i) f(static_cast<Eigen::Index>(i)) += p.learning_rate * tree.nodes[leaf[i]].value;
    s.trees.push_back(std::move(tree));
    s.training_loss.push_back(mean_logloss(f, y));
  }
  return s;
}

Eigen::VectorXd boosting_logit(const BoostingState& s, const Eigen::MatrixXd& x) {
  Eigen::VectorXd f = Eigen::VectorXd::Constant(x.rows(), s.initial_logit);
  for (const auto& tree : s.trees) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) f(i) += s.learning_rate * tree.predict(x.row(i));
  }
  return f;
}

}  // namespace ehg::models
