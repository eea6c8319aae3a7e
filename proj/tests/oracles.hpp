// Slow, independent reference implementations used only by the tests.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

// Normal CDF in long double: Taylor series near 0, Laplace continued
// fraction in the tails.
inline long double phi(long double x) {
    const long double pdf = std::exp(-0.5L * x * x) / std::sqrt(2.0L * std::numbers::pi_v<long double>);
    if (std::fabs(x) < 3.0L) {
        long double term = x, sum = x;
        for (int k = 1; k < 400; ++k) {
            term *= x * x / (2.0L * k + 1.0L);
            sum += term;
            if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
        }
        return 0.5L + pdf * sum;
    }
    const long double a = std::fabs(x);
    long double f = a;
    for (int k = 300; k >= 1; --k) f = a + k / f;
    const long double tail = pdf / f;
    return x > 0 ? 1.0L - tail : tail;
}

// Van der Corput in base 2 truncated to p digits.
inline double radical_inverse(std::uint64_t i, unsigned p) {
    double x = 0.0, f = 0.5;
    for (unsigned k = 0; k < p && i; ++k, i >>= 1, f *= 0.5)
        if (i & 1) x += f;
    return x;
}

inline double b2(double x) { return x * x - x + 1.0 / 6.0; }

inline double frac_mul(std::uint64_t i, std::uint64_t z, std::uint64_t n) {
    return static_cast<double>((i * z) % n) / static_cast<double>(n);
}

struct Pod {
    std::vector<double> order;  // Gamma_0..Gamma_s
    std::vector<double> dim;    // gamma_1..gamma_s
    double weight(std::uint64_t mask) const {
        double w = 1.0;
        std::size_t k = 0;
        for (std::size_t j = 0; j < dim.size(); ++j)
            if (mask >> j & 1) {
                w *= dim[j];
                ++k;
            }
        return order[k] * w;
    }
};

inline int popcount(std::uint64_t m) {
    int c = 0;
    for (; m; m &= m - 1) ++c;
    return c;
}

inline double weight_sum(const Pod& w, double lambda, double vartheta, std::size_t s) {
    double sum = 0.0;
    for (std::uint64_t u = 1; u < (std::uint64_t{1} << s); ++u)
        sum += std::pow(w.weight(u), lambda) * std::pow(vartheta, popcount(u));
    return sum;
}

inline double norm_bound(const std::vector<double>& b, const Pod& w, double kappa, double g,
                         double a_min) {
    double sum = 0.0;
    for (std::uint64_t u = 0; u < (std::uint64_t{1} << b.size()); ++u) {
        double num = std::tgamma(popcount(u) + 1.0);
        num *= num;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (u >> j & 1) num *= b[j] * b[j];
        sum += num / w.weight(u);
    }
    return kappa * g / a_min * std::sqrt(sum);
}

// Shift-averaged worst-case error squared by summing over all subsets.
inline double wce2(const std::vector<std::uint64_t>& z, std::uint64_t n, const Pod& w) {
    const std::size_t s = z.size();
    double total = 0.0;
    for (std::uint64_t u = 1; u < (std::uint64_t{1} << s); ++u) {
        double inner = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            double p = 1.0;
            for (std::size_t j = 0; j < s; ++j)
                if (u >> j & 1) p *= b2(frac_mul(i, z[j], n));
            inner += p;
        }
        total += w.weight(u) * inner / static_cast<double>(n);
    }
    return total;
}

// Greedy CBC driven by the subset-sum error; ties go to the smaller z.
inline std::vector<std::uint64_t> cbc(std::uint64_t n, std::size_t s, const Pod& w) {
    std::vector<std::uint64_t> z;
    for (std::size_t d = 0; d < s; ++d) {
        Pod wd{w.order, std::vector<double>(w.dim.begin(), w.dim.begin() + d + 1)};
        std::uint64_t best = 1;
        double best_e = INFINITY;
        for (std::uint64_t c = 1; c < n; c += 2) {
            z.push_back(c);
            const double e = wce2(z, n, wd);
            z.pop_back();
            if (e < best_e * (1.0 - 1e-12)) {
                best_e = e;
                best = c;
            }
        }
        z.push_back(best);
    }
    return z;
}

} // namespace oracle

namespace oracle {

// Extended-precision Galerkin solve of -(a u')' = 1 on a uniform mesh with
// the uniform sine-mode coefficient sampled at element midpoints. Returns
// the M+1 nodal values.
inline std::vector<long double> fem_uniform_ld(long double a0, long double amplitude,
                                               long double decay, const std::vector<long double>& y,
                                               std::size_t M) {
    const long double h = 1.0L / M;
    const long double pi = std::numbers::pi_v<long double>;
    std::vector<long double> a(M);
    for (std::size_t e = 0; e < M; ++e) {
        const long double x = (e + 0.5L) * h;
        long double v = a0;
        for (std::size_t j = 1; j <= y.size(); ++j)
            v += y[j - 1] * amplitude * std::pow(static_cast<long double>(j), -decay) *
                 std::sin(j * pi * x);
        a[e] = v;
    }
    const std::size_t n = M - 1;
    std::vector<long double> diag(n), off(n), rhs(n, h), u(M + 1, 0.0L);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = (a[i] + a[i + 1]) / h;
        off[i] = -a[i + 1] / h;
    }
    for (std::size_t i = 1; i < n; ++i) {
        const long double w = off[i - 1] / diag[i - 1];
        diag[i] -= w * off[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    u[n] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) u[i + 1] = (rhs[i] - off[i] * u[i + 2]) / diag[i];
    return u;
}

} // namespace oracle
