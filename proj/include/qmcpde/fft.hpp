#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qmcpde {

/// In-place iterative radix-2 FFT; length must be a power of two.
/// inverse = true computes the unnormalized backward transform.
void fft_radix2(std::span<std::complex<double>> a, bool inverse);

/// c[k] = sum_e w[(k + e) mod N] * q[e] for real w, q of equal power-of-two
/// length N.
std::vector<double> cyclic_correlation(std::span<const double> w, std::span<const double> q);

/// Same as cyclic_correlation with the transform of w precomputed.
std::vector<double> cyclic_correlation_with(std::span<const std::complex<double>> w_hat,
                                            std::span<const double> q);

} // namespace qmcpde
