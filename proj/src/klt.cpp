#include "ehg/klt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ehg/errors.hpp"

namespace ehg {

AutocorrSequence autocorrelation(std::span<const double> x, std::size_t lag) {
  if (lag < 2) throw ValidationError("autocorrelation lag must be at least 2");
  const std::size_t n = x.size();
  if (n <= lag) {
    throw LengthError("autocorrelation needs more than " + std::to_string(lag) + " samples, got " +
                      std::to_string(n));
  }
  AutocorrSequence r;
  r.values.resize(lag);
  for (std::size_t k = 0; k < lag; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) acc += x[i] * x[i + k];
    r.values[k] = acc / static_cast<double>(n - k);
  }
  return r;
}

Eigen::MatrixXd toeplitz(const AutocorrSequence& r) {
  const auto n = static_cast<Eigen::Index>(r.lag());
  Eigen::MatrixXd t(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) t(i, j) = r.values[static_cast<std::size_t>(std::abs(i - j))];
  }
  return t;
}

SubspaceSelection select_signal_subspace(std::span<const double> eig, double threshold) {
  if (eig.size() < 2) throw ValidationError("subspace selection needs at least 2 eigenvalues");
  SubspaceSelection sel;
  sel.threshold = threshold;
  sel.first_retained = 0;

  const double largest = *std::max_element(eig.begin(), eig.end());
  if (!(largest > 0.0)) {
    // Zero or negative spectrum: no signal structure to separate.
    sel.clamped_log_eigenvalues.assign(eig.size(), -std::numeric_limits<double>::infinity());
    return sel;
  }

  const double floor = 1e-12 * largest;
  sel.clamped_log_eigenvalues.reserve(eig.size());
  for (double v : eig) sel.clamped_log_eigenvalues.push_back(std::log(std::max(v, floor)));

  const auto& g = sel.clamped_log_eigenvalues;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double denom = std::abs(g[i - 1]);
    const double change = denom < 1e-12 ? std::numeric_limits<double>::infinity()
                                        : (g[i] - g[i - 1]) / denom;
    if (change > threshold) {
      sel.first_retained = i;
      break;
    }
  }
  return sel;
}

std::vector<double> project_frames(std::span<const double> x, const Eigen::MatrixXd& q,
                                   std::size_t first_retained) {
  const auto lag = static_cast<std::size_t>(q.rows());
  const std::size_t n = x.size();
  const std::size_t frames = (n + lag - 1) / lag;

  Eigen::MatrixXd framed = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lag),
                                                 static_cast<Eigen::Index>(frames));
  for (std::size_t i = 0; i < n; ++i) {
    framed(static_cast<Eigen::Index>(i % lag), static_cast<Eigen::Index>(i / lag)) = x[i];
  }

  const auto keep = static_cast<Eigen::Index>(lag - first_retained);
  const auto qk = q.rightCols(keep);
  const Eigen::MatrixXd coeffs = qk.transpose() * framed;
  const Eigen::MatrixXd rebuilt = qk * coeffs;

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = rebuilt(static_cast<Eigen::Index>(i % lag), static_cast<Eigen::Index>(i / lag));
  }
  return out;
}

KltResult denoise_detailed(std::span<const double> signal, const KltOptions& options) {
  const std::size_t n = signal.size();
  if (n < 2 * options.lag) {
    throw LengthError("KLT denoising needs at least " + std::to_string(2 * options.lag) +
                      " samples, got " + std::to_string(n));
  }

  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(n);
  std::vector<double> centred(signal.begin(), signal.end());
  for (double& v : centred) v -= mean;

  KltResult res;
  res.basis = symmetric_eigen(toeplitz(autocorrelation(centred, options.lag)));
  const auto& ev = res.basis.eigenvalues;
  res.selection = select_signal_subspace(std::span<const double>(ev.data(), static_cast<std::size_t>(ev.size())),
                                         options.jump_threshold);

  res.signal = project_frames(centred, res.basis.eigenvectors, res.selection.first_retained);
  const double drift = std::accumulate(res.signal.begin(), res.signal.end(), 0.0) / static_cast<double>(n);
  for (double& v : res.signal) v += mean - drift;
  return res;
}

std::vector<double> denoise(std::span<const double> signal, const KltOptions& options) {
  return denoise_detailed(signal, options).signal;
}

}  // namespace ehg
