#include "qmcpde/points.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qmcpde/rng.hpp"

namespace qmcpde {

bool is_power_of_two(std::uint64_t n) { return std::has_single_bit(n); }

LatticeRule::LatticeRule(std::uint64_t n, std::vector<std::uint64_t> z)
    : n_(n), z_(std::move(z)) {
    if (!is_power_of_two(n))
        throw std::invalid_argument("lattice size must be a power of 2, got " +
                                    std::to_string(n));
    if (z_.empty()) throw std::invalid_argument("generating vector is empty");
    for (std::size_t j = 0; j < z_.size(); ++j) {
        const auto zj = z_[j];
        const bool ok = n == 1 ? zj == 0 : (zj % 2 == 1 && zj < n);
        if (!ok)
            throw std::invalid_argument("generator component " + std::to_string(j + 1) +
                                        " = " + std::to_string(zj) +
                                        " is not an odd residue mod " + std::to_string(n));
    }
}

namespace {

double frac(double x) { return x - std::floor(x); }

void check_shift(std::size_t s, std::span<const double> shift) {
    if (shift.size() != s)
        throw std::invalid_argument("shift has dimension " + std::to_string(shift.size()) +
                                    ", rule has " + std::to_string(s));
}

void fill_lattice_row(const LatticeRule& rule, std::uint64_t i,
                      std::span<const double> shift, double* out) {
    const auto n = rule.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto& z = rule.generator();
    for (std::size_t j = 0; j < z.size(); ++j) {
        // (i*z) mod n is exact in integers; n is a power of two so the
        // product wraps harmlessly in unsigned arithmetic.
        const std::uint64_t k = (i * z[j]) & (n - 1);
        const double t = static_cast<double>(k) * inv_n;
        out[j] = shift[j] == 0.0 ? t : frac(t + shift[j]);
    }
}

} // namespace

std::vector<double> lattice_point(const LatticeRule& rule, std::uint64_t i,
                                  std::span<const double> shift) {
    if (i >= rule.size())
        throw std::out_of_range("lattice index " + std::to_string(i) + " >= n = " +
                                std::to_string(rule.size()));
    check_shift(rule.dimension(), shift);
    std::vector<double> p(rule.dimension());
    fill_lattice_row(rule, i, shift, p.data());
    return p;
}

PointBlock generate_block(const LatticeRule& rule, std::span<const double> shift) {
    check_shift(rule.dimension(), shift);
    PointBlock block{rule.size(), rule.dimension(), {}};
    block.data.resize(block.rows * block.cols);
    for (std::uint64_t i = 0; i < rule.size(); ++i)
        fill_lattice_row(rule, i, shift, block.data.data() + i * block.cols);
    return block;
}

std::vector<double> map_uniform(std::span<const double> t) {
    std::vector<double> y(t.begin(), t.end());
    for (double& v : y) v -= 0.5;
    return y;
}

namespace {

// Lower-tail quantile for 0 < p <= 1/2, Wichura's AS 241 (PPND16).
double lower_quantile(double p) {
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852854561 + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = std::sqrt(-std::log(p));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                    0.24178072517745061177) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                    0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                  0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                    0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                  0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                    1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                  0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return -val;
}

} // namespace

double inv_normal_cdf(double w) {
    if (!(w > 0.0 && w < 1.0))
        throw std::domain_error("inverse normal CDF needs 0 < w < 1, got " + std::to_string(w));
    if (w <= 0.5) return lower_quantile(w);
    // 1 - w is exact for w in [1/2, 1).
    return -lower_quantile(1.0 - w);
}

std::vector<double> map_lognormal(std::span<const double> t) {
    std::vector<double> y(t.size());
    for (std::size_t j = 0; j < t.size(); ++j) y[j] = inv_normal_cdf(t[j]);
    return y;
}

std::vector<double> draw_shift(std::size_t k, std::size_t s, std::uint64_t seed) {
    std::vector<double> d(s);
    for (std::size_t j = 0; j < s; ++j) d[j] = counter_uniform(seed, k, j);
    return d;
}

ShiftSet draw_shifts(std::size_t r, std::size_t s, std::uint64_t seed) {
    if (r == 0 || s == 0) throw std::invalid_argument("need r >= 1 shifts of dimension s >= 1");
    ShiftSet set{seed, s, {}};
    set.shifts.reserve(r);
    for (std::size_t k = 0; k < r; ++k) set.shifts.push_back(draw_shift(k, s, seed));
    return set;
}

GeneratingMatrices::GeneratingMatrices(unsigned m, unsigned precision,
                                       std::vector<std::vector<std::uint64_t>> columns)
    : m_(m), p_(precision), columns_(std::move(columns)) {
    if (m < 1 || m > 32) throw std::invalid_argument("m must lie in [1, 32]");
    if (precision < m || precision > 64)
        throw std::invalid_argument("precision must lie in [m, 64]");
    if (columns_.empty()) throw std::invalid_argument("generating matrices need s >= 1");
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (columns_[j].size() != m)
            throw std::invalid_argument("dimension " + std::to_string(j + 1) + " has " +
                                        std::to_string(columns_[j].size()) +
                                        " columns, expected " + std::to_string(m));
        for (auto c : columns_[j])
            if (precision < 64 && c >> precision)
                throw std::invalid_argument("column integer " + std::to_string(c) +
                                            " exceeds 2^" + std::to_string(precision));
    }
}

GeneratingMatrices GeneratingMatrices::identity(std::size_t s, unsigned m,
                                                unsigned precision) {
    std::vector<std::uint64_t> cols(m);
    for (unsigned k = 0; k < m; ++k) cols[k] = std::uint64_t{1} << (precision - 1 - k);
    return GeneratingMatrices(m, precision, std::vector(s, cols));
}

namespace {

// The column integers are p-bit binary fractions: the most significant
// of the p bits is the first output digit, so x maps to x * 2^-p.
double digits_to_unit(std::uint64_t x, unsigned precision) {
    return std::ldexp(static_cast<double>(x), -static_cast<int>(precision));
}

} // namespace

std::vector<double> digital_point(const GeneratingMatrices& mats, std::uint64_t i) {
    if (i >= mats.size())
        throw std::out_of_range("digital net index " + std::to_string(i) + " >= 2^" +
                                std::to_string(mats.log2_size()));
    std::vector<double> p(mats.dimension());
    for (std::size_t j = 0; j < p.size(); ++j) {
        std::uint64_t x = 0;
        const auto& cols = mats.columns()[j];
        for (unsigned k = 0; k < mats.log2_size(); ++k)
            if ((i >> k) & 1U) x ^= cols[k];
        p[j] = digits_to_unit(x, mats.precision());
    }
    return p;
}

PointBlock digital_block(const GeneratingMatrices& mats) {
    const std::size_t s = mats.dimension();
    PointBlock block{mats.size(), s, {}};
    block.data.assign(block.rows * s, 0.0);
    std::vector<std::uint64_t> state(s, 0);
    // Gray-code walk: step k flips the lowest set bit of k, so the state
    // after k steps holds the digits of gray(k) = k ^ (k >> 1).
    for (std::uint64_t k = 0; k < mats.size(); ++k) {
        if (k > 0) {
            const unsigned c = static_cast<unsigned>(std::countr_zero(k));
            for (std::size_t j = 0; j < s; ++j) state[j] ^= mats.columns()[j][c];
        }
        const std::uint64_t idx = k ^ (k >> 1);
        for (std::size_t j = 0; j < s; ++j)
            block.data[idx * s + j] = digits_to_unit(state[j], mats.precision());
    }
    return block;
}

} // namespace qmcpde
