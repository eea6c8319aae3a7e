#include "qmcpde/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qmcpde {

void fft_radix2(std::span<std::complex<double>> a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || !std::has_single_bit(n)) throw std::invalid_argument("FFT length must be 2^k");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // Twiddles computed directly rather than by repeated multiplication.
        for (std::size_t k = 0; k < half; ++k) {
            const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                               static_cast<double>(len);
            const std::complex<double> w(std::cos(ang), std::sin(ang));
            for (std::size_t i = k; i < n; i += len) {
                const auto u = a[i];
                const auto v = a[i + half] * w;
                a[i] = u + v;
                a[i + half] = u - v;
            }
        }
    }
}

std::vector<double> cyclic_correlation_with(std::span<const std::complex<double>> w_hat,
                                            std::span<const double> q) {
    const std::size_t n = q.size();
    if (w_hat.size() != n) throw std::invalid_argument("correlation length mismatch");
    std::vector<std::complex<double>> buf(q.begin(), q.end());
    fft_radix2(buf, false);
    // corr(k) = sum_e w(k+e) q(e)  <=>  DFT: W(f) * conj(Q(f)) for real q.
    for (std::size_t f = 0; f < n; ++f) buf[f] = w_hat[f] * std::conj(buf[f]);
    fft_radix2(buf, true);
    std::vector<double> out(n);
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = buf[k].real() * inv;
    return out;
}

std::vector<double> cyclic_correlation(std::span<const double> w, std::span<const double> q) {
    std::vector<std::complex<double>> w_hat(w.begin(), w.end());
    fft_radix2(w_hat, false);
    return cyclic_correlation_with(w_hat, q);
}

} // namespace qmcpde
