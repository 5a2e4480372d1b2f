#include <cmath>

#include "ehg/classifiers.hpp"

namespace ehg {

double sigmoid(double z) {
  if (z > 0.0) {
    const double s = 1.0 / (1.0 + std::exp(-z));
    return s > 0.5 ? s : std::nextafter(0.5, 1.0);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace models {

// Minimizes mean log-loss + ||w||^2 / (2 C n); the intercept is not penalized.
LinearState fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y, const LogisticParams& p) {
  const auto n = x.rows();
  const auto d = x.cols();
  const double nd = static_cast<double>(n);
  const double lambda = 1.0 / (p.c * nd);

  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) target(i) = y[static_cast<std::size_t>(i)];

  // Lipschitz bound of the gradient: 0.25 * ||[X 1]||_F^2 / n + lambda.
  const double lip = 0.25 * (x.squaredNorm() + nd) / nd + lambda;
  const double step = 1.0 / lip;

  LinearState s;
  s.weights = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd prob(n);
  for (s.iterations = 0; s.iterations < p.max_iterations; ++s.iterations) {
    const Eigen::VectorXd z = (x * s.weights).array() + s.bias;
    for (Eigen::Index i = 0; i < n; ++i) prob(i) = 1.0 / (1.0 + std::exp(-z(i)));
    const Eigen::VectorXd resid = prob - target;
    const Eigen::VectorXd gw = x.transpose() * resid / nd + lambda * s.weights;
    const double gb = resid.sum() / nd;
    if (std::sqrt(gw.squaredNorm() + gb * gb) < p.tolerance) break;
    s.weights -= step * gw;
    s.bias -= step * gb;
  }
  return s;
}

}  // namespace models
}  // namespace ehg
