#include <cmath>
#include <numeric>

#include "ehg/classifiers.hpp"
#include "ehg/random.hpp"

namespace ehg::models {

namespace {

struct Adam {
  Eigen::MatrixXd m, v;

  explicit Adam(Eigen::Index rows, Eigen::Index cols) : m(Eigen::MatrixXd::Zero(rows, cols)), v(m) {}

  void step(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad, const MlpParams& p, double lr_t) {
    m = p.beta1 * m + (1.0 - p.beta1) * grad;
    v = p.beta2 * v + (1.0 - p.beta2) * grad.cwiseProduct(grad);
    param.array() -= lr_t * m.array() / (v.array().sqrt() + p.epsilon);
  }
};

}  // namespace

// One ReLU hidden layer, logistic output, mean cross-entropy + l2/(2m) ||W||^2 per batch.
MlpState fit_mlp(const Eigen::MatrixXd& x, std::span<const int> y, const MlpParams& p, std::uint64_t seed) {
  const auto n = x.rows();
  const auto d = x.cols();
  const auto h = static_cast<Eigen::Index>(p.hidden_units);
  Rng rng(seed);

  // Glorot-uniform bounds with the factor 6 used for ReLU networks.
  MlpState s;
  const double bound1 = std::sqrt(6.0 / static_cast<double>(d + h));
  const double bound2 = std::sqrt(6.0 / static_cast<double>(h + 1));
  s.w1.resize(d, h);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < h; ++j) s.w1(i, j) = rng.uniform(-bound1, bound1);
  }
  s.b1.resize(h);
  for (Eigen::Index j = 0; j < h; ++j) s.b1(j) = rng.uniform(-bound1, bound1);
  s.w2.resize(h);
  for (Eigen::Index j = 0; j < h; ++j) s.w2(j) = rng.uniform(-bound2, bound2);
  s.b2 = rng.uniform(-bound2, bound2);

  Adam a_w1(d, h), a_b1(h, 1), a_w2(h, 1), a_b2(1, 1);
  Eigen::MatrixXd b2m(1, 1);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch = static_cast<Eigen::Index>(std::min<std::size_t>(p.batch_size, static_cast<std::size_t>(n)));
  std::size_t t = 0;

  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    rng.shuffle(std::span<Eigen::Index>(order));
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index m = std::min(batch, n - start);
      Eigen::MatrixXd xb(m, d);
      Eigen::VectorXd yb(m);
      for (Eigen::Index r = 0; r < m; ++r) {
        const auto row = order[static_cast<std::size_t>(start + r)];
        xb.row(r) = x.row(row);
        yb(r) = y[static_cast<std::size_t>(row)];
      }
      const double md = static_cast<double>(m);

      Eigen::MatrixXd z1 = (xb * s.w1).rowwise() + s.b1.transpose();
      const Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
      const Eigen::VectorXd z2 = (a1 * s.w2).array() + s.b2;
      const Eigen::VectorXd prob = (1.0 + (-z2.array()).exp()).inverse();

      const Eigen::VectorXd delta2 = (prob - yb) / md;
      const Eigen::VectorXd g_w2 = a1.transpose() * delta2 + (p.l2 / md) * s.w2;
      Eigen::MatrixXd g_b2(1, 1);
      g_b2(0, 0) = delta2.sum();
      Eigen::MatrixXd delta1 = delta2 * s.w2.transpose();
      delta1.array() *= (z1.array() > 0.0).cast<double>();
      const Eigen::MatrixXd g_w1 = xb.transpose() * delta1 + (p.l2 / md) * s.w1;
      const Eigen::VectorXd g_b1 = delta1.colwise().sum().transpose();

      ++t;
      const double td = static_cast<double>(t);
      const double lr_t = p.learning_rate * std::sqrt(1.0 - std::pow(p.beta2, td)) / (1.0 - std::pow(p.beta1, td));
      a_w1.step(s.w1, g_w1, p, lr_t);
      a_b1.step(s.b1, g_b1, p, lr_t);
      a_w2.step(s.w2, g_w2, p, lr_t);
      b2m(0, 0) = s.b2;
      a_b2.step(b2m, g_b2, p, lr_t);
      s.b2 = b2m(0, 0);
    }
  }
  return s;
}

Eigen::VectorXd mlp_logit(const MlpState& s, const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd a1 = ((x * s.w1).rowwise() + s.b1.transpose()).cwiseMax(0.0);
  return (a1 * s.w2).array() + s.b2;
}

}  // namespace ehg::models
