#include <cmath>

#include "ehg/classifiers.hpp"

namespace ehg {

Standardizer fit_standardizer(const Eigen::MatrixXd& x) {
  Standardizer s;
  const auto d = x.cols();
  s.mean = Eigen::VectorXd::Zero(d);
  s.scale = Eigen::VectorXd::Zero(d);
  if (x.rows() == 0) return s;
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < d; ++j) {
    const double mu = x.col(j).sum() / n;
    const double var = (x.col(j).array() - mu).square().sum() / n;
    const double sd = std::sqrt(var);
    s.mean(j) = mu;
    // Near-constant columns are left as they are.
    s.scale(j) = sd > 1e-12 * std::max(1.0, std::abs(mu)) ? sd : 0.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (scale(j) > 0.0) out.col(j) = (x.col(j).array() - mean(j)) / scale(j);
  }
  return out;
}

StandardizedPair standardize_fit_apply(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& x_eval) {
  StandardizedPair p;
  p.stats = fit_standardizer(x_train);
  p.train = p.stats.apply(x_train);
  if (x_eval.cols() != x_train.cols()) throw ShapeError("standardize: train/eval column counts differ");
  p.eval = p.stats.apply(x_eval);
  return p;
}

}  // namespace ehg
