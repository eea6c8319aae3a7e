#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qmcpde/points.hpp"
#include "qmcpde/theory.hpp"

namespace qmcpde {

/// Degree-2 Bernoulli polynomial x^2 - x + 1/6: the shift-averaged kernel
/// of the unanchored weighted Sobolev space of smoothness one.
constexpr double kernel_b2(double x) { return x * (x - 1.0) + 1.0 / 6.0; }

/// Shift-averaged squared worst-case error
///   e^2 = sum_{u != {}} gamma_u (1/n) sum_i prod_{j in u} B2(frac(i z_j / n)).
double wce_squared(const LatticeRule& rule, const PodWeights& weights);

struct CbcResult {
    LatticeRule rule;
    double wce2 = 0.0;
    /// Squared error of the partial rule after each component.
    std::vector<double> wce2_by_dim;
    /// Sum of the order accumulators after the last component.
    double checksum = 0.0;
};

/// Component-by-component search over odd candidates, evaluating every
/// candidate directly: O(s n^2 + s^2 n).
CbcResult cbc_naive(std::uint64_t n, std::size_t s, const PodWeights& weights);

/// Same selection as cbc_naive with candidate costs from FFT-based
/// circulant products over the odd residues mod n: O(s n log n + s^2 n).
CbcResult cbc_fast(std::uint64_t n, std::size_t s, const PodWeights& weights);

} // namespace qmcpde
