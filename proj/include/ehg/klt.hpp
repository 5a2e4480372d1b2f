#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ehg {

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending;
/// column i of `eigenvectors` pairs with eigenvalues[i].
struct EigenBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
};

/// Householder tridiagonalization followed by implicit QL with shifts.
/// Throws ValidationError for non-square or asymmetric input and NumericalError
/// if an eigenvalue fails to converge within 30 sweeps per index.
EigenBasis symmetric_eigen(const Eigen::MatrixXd& m);

/// Unbiased lag-limited autocorrelation r[k] = 1/(N-k) * sum x[n] x[n+k], k < lag.
/// Works on the values as given; callers remove the mean when they need to.
struct AutocorrSequence {
  std::vector<double> values;
  std::size_t lag() const { return values.size(); }
};

AutocorrSequence autocorrelation(std::span<const double> signal, std::size_t lag);

/// Symmetric Toeplitz matrix T(i, j) = r[|i - j|].
Eigen::MatrixXd toeplitz(const AutocorrSequence& r);

struct SubspaceSelection {
  std::size_t first_retained = 0;  // 0-based; eigenvectors [first_retained, L) are kept
  double threshold = 0.10;
  std::vector<double> clamped_log_eigenvalues;

  std::size_t retained_count() const { return clamped_log_eigenvalues.size() - first_retained; }
};

/// Cuts the ascending eigenvalue spectrum at the first index i >= 1 where the relative
/// change of the log eigenvalue, (g[i] - g[i-1]) / |g[i-1]|, exceeds `threshold`.
/// Eigenvalues are clamped to 1e-12 * max before the log. No jump keeps everything.
SubspaceSelection select_signal_subspace(std::span<const double> ascending_eigenvalues,
                                         double threshold = 0.10);

struct KltOptions {
  std::size_t lag = 50;
  double jump_threshold = 0.10;
};

struct KltResult {
  std::vector<double> signal;
  EigenBasis basis;
  SubspaceSelection selection;
};

/// Projects non-overlapping length-L frames of a zero-mean signal (last frame zero-padded)
/// onto eigenvectors [first_retained, L) and reassembles the signal.
std::vector<double> project_frames(std::span<const double> zero_mean_signal,
                                   const Eigen::MatrixXd& eigenvectors,
                                   std::size_t first_retained);

/// Subspace denoising. The mean is removed before estimation and restored afterwards;
/// the reconstruction is re-centred so the output mean equals the input mean.
/// Requires signal.size() >= 2 * lag.
KltResult denoise_detailed(std::span<const double> signal, const KltOptions& options = {});

std::vector<double> denoise(std::span<const double> signal, const KltOptions& options = {});

}  // namespace ehg
