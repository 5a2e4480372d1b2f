#include <cmath>

#include "ehg/classifiers.hpp"
#include "ehg/errors.hpp"

namespace ehg::models {

QdaState fit_qda(const Eigen::MatrixXd& x, std::span<const int> y, const QdaParams& p) {
  const auto d = x.cols();
  const auto n = static_cast<double>(x.rows());
  QdaState s;
  for (int c = 0; c < 2; ++c) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == c) rows.push_back(static_cast<Eigen::Index>(i));
    }
    const auto nc = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd xc(nc, d);
    for (Eigen::Index r = 0; r < nc; ++r) xc.row(r) = x.row(rows[static_cast<std::size_t>(r)]);

    Eigen::VectorXd mu = xc.colwise().mean().transpose();
    xc.rowwise() -= mu.transpose();
    Eigen::MatrixXd cov = (xc.transpose() * xc) / static_cast<double>(nc - 1);

    const double avg_var = cov.trace() / static_cast<double>(d);
    double ridge = p.ridge * (avg_var > 0.0 ? avg_var : 1.0);
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (int attempt = 0;; ++attempt) {
      llt.compute(cov + ridge * Eigen::MatrixXd::Identity(d, d));
      if (llt.info() == Eigen::Success) break;
      if (attempt == 12) throw NumericalError("QDA: covariance not positive definite after ridge escalation");
      ridge *= 10.0;
    }
    cov.diagonal().array() += ridge;

    const auto ci = static_cast<std::size_t>(c);
    s.mean[ci] = std::move(mu);
    s.chol_l[ci] = llt.matrixL();
    s.log_det(c) = 2.0 * s.chol_l[ci].diagonal().array().log().sum();
    s.covariance[ci] = std::move(cov);
    s.log_prior(c) = std::log(static_cast<double>(nc) / n);
  }
  return s;
}

Eigen::VectorXd qda_decision(const QdaState& s, const Eigen::MatrixXd& x) {
  Eigen::VectorXd delta[2];
  for (std::size_t c = 0; c < 2; ++c) {
    Eigen::MatrixXd centered = (x.rowwise() - s.mean[c].transpose()).transpose();
    s.chol_l[c].triangularView<Eigen::Lower>().solveInPlace(centered);
    const Eigen::VectorXd maha = centered.colwise().squaredNorm().transpose();
    const auto ci = static_cast<Eigen::Index>(c);
    delta[c] = (-0.5 * maha).array() - 0.5 * s.log_det(ci) + s.log_prior(ci);
  }
  return delta[1] - delta[0];
}

}  // namespace ehg::models
