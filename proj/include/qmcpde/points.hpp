#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qmcpde {

/// Rank-1 lattice rule: point i is frac(i * z / n). The point count is a
/// power of two and every generator component is odd (n >= 2), or zero
/// when n == 1.
class LatticeRule {
public:
    LatticeRule(std::uint64_t n, std::vector<std::uint64_t> z);

    std::uint64_t size() const { return n_; }
    std::size_t dimension() const { return z_.size(); }
    const std::vector<std::uint64_t>& generator() const { return z_; }

    friend bool operator==(const LatticeRule&, const LatticeRule&) = default;

private:
    std::uint64_t n_;
    std::vector<std::uint64_t> z_;
};

/// Dense row-major point matrix.
struct PointBlock {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data).subspan(i * cols, cols);
    }
};

/// r random shifts in [0,1)^s. Shift k, component j is a pure function of
/// (seed, k, j).
struct ShiftSet {
    std::uint64_t seed = 0;
    std::size_t dimension = 0;
    std::vector<std::vector<double>> shifts;

    std::size_t count() const { return shifts.size(); }
};

/// Base-2 generating matrices for a digital net with 2^m points. Column k
/// of dimension j is a p-bit integer read as a binary fraction: bit p-1
/// (the MSB) is the output digit of weight 1/2, bit 0 has weight 2^-p.
class GeneratingMatrices {
public:
    GeneratingMatrices(unsigned m, unsigned precision,
                       std::vector<std::vector<std::uint64_t>> columns);

    /// Column k = 2^(p-1-k): the van der Corput net in every dimension.
    static GeneratingMatrices identity(std::size_t s, unsigned m,
                                       unsigned precision);

    std::size_t dimension() const { return columns_.size(); }
    unsigned log2_size() const { return m_; }
    unsigned precision() const { return p_; }
    std::uint64_t size() const { return std::uint64_t{1} << m_; }
    const std::vector<std::vector<std::uint64_t>>& columns() const { return columns_; }

    friend bool operator==(const GeneratingMatrices&, const GeneratingMatrices&) = default;

private:
    unsigned m_;
    unsigned p_;
    std::vector<std::vector<std::uint64_t>> columns_;
};

bool is_power_of_two(std::uint64_t n);

std::vector<double> lattice_point(const LatticeRule& rule, std::uint64_t i,
                                  std::span<const double> shift);
PointBlock generate_block(const LatticeRule& rule, std::span<const double> shift);

std::vector<double> map_uniform(std::span<const double> t);

/// Standard normal quantile (AS 241), exactly odd about 1/2.
double inv_normal_cdf(double w);
std::vector<double> map_lognormal(std::span<const double> t);

ShiftSet draw_shifts(std::size_t r, std::size_t s, std::uint64_t seed);
std::vector<double> draw_shift(std::size_t k, std::size_t s, std::uint64_t seed);

/// Point i of the digital net: XOR of the columns selected by the bits of i.
std::vector<double> digital_point(const GeneratingMatrices& mats, std::uint64_t i);
/// All 2^m points in index order, generated in Gray-code order internally.
PointBlock digital_block(const GeneratingMatrices& mats);

} // namespace qmcpde
