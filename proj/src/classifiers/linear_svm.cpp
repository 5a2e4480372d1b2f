#include <cmath>
#include <limits>

#include "ehg/classifiers.hpp"

namespace ehg::models {

// Full-batch Pegasos on lambda/2 ||w||^2 + mean hinge, lambda = 1 / (C n).
// Step 1 / (lambda t); the best iterate by objective is kept since sub-gradient
// steps are not monotone.
LinearState fit_linear_svm(const Eigen::MatrixXd& x, std::span<const int> y, const SvmParams& p) {
  const auto n = x.rows();
  const auto d = x.cols();
  const double nd = static_cast<double>(n);
  const double lambda = 1.0 / (p.c * nd);
  const double radius = 1.0 / std::sqrt(lambda);

  Eigen::VectorXd ys(n);
  for (Eigen::Index i = 0; i < n; ++i) ys(i) = y[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  LinearState best;
  best.weights = w;
  double best_obj = std::numeric_limits<double>::infinity();

  Eigen::VectorXd coef(n);
  for (std::size_t t = 1;; ++t) {
    const Eigen::VectorXd margin = ys.array() * ((x * w).array() + b);
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool active = margin(i) < 1.0;
      hinge += active ? 1.0 - margin(i) : 0.0;
      coef(i) = active ? ys(i) : 0.0;
    }
    const double obj = 0.5 * lambda * w.squaredNorm() + hinge / nd;
    if (obj < best_obj) {
      best_obj = obj;
      best.weights = w;
      best.bias = b;
      best.iterations = t - 1;
    }
    if (t > p.iterations) break;

    const double eta = 1.0 / (lambda * static_cast<double>(t));
    const Eigen::VectorXd gw = lambda * w - x.transpose() * coef / nd;
    const double gb = -coef.sum() / nd;
    w -= eta * gw;
    b -= eta * gb;
    const double norm = w.norm();
    if (norm > radius) w *= radius / norm;
  }
  return best;
}

}  // namespace ehg::models
