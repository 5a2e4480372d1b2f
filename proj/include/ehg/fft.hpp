#pragma once

#include <complex>
#include <vector>

namespace ehg {

/// In-place forward DFT, X[k] = sum x[n] exp(-2*pi*i*k*n/N), for any length.
/// Power-of-two sizes use iterative radix-2; other sizes go through Bluestein's chirp-z.
void fft_inplace(std::vector<std::complex<double>>& data);

std::size_t next_power_of_two(std::size_t n);

}  // namespace ehg
