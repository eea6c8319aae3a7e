#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace qmcpde {

/// Decay sequence b_1..b_s of the coefficient fluctuations relative to
/// a_min, with its summability exponent p0.
struct DecayModel {
    std::vector<double> b;
    double p0 = 0.5;

    std::size_t dimension() const { return b.size(); }
    /// sum_j b_j^p0 over the stored terms.
    double p0_sum() const;
};

/// Product and order dependent weights gamma_u = Gamma_|u| * prod_{j in u} gamma_j.
/// Order factors are stored as logarithms because (l!)^k overflows long
/// before the matching products underflow; log(0) = -inf encodes a zero
/// factor.
class PodWeights {
public:
    PodWeights() = default;
    PodWeights(std::vector<double> log_order, std::vector<double> dim);

    static PodWeights product(std::vector<double> dim);

    std::size_t dimension() const { return dim_.size(); }
    double order(std::size_t l) const { return std::exp(log_order_.at(l)); }
    double log_order(std::size_t l) const { return log_order_.at(l); }
    double dim(std::size_t j) const { return dim_.at(j); }
    const std::vector<double>& dims() const { return dim_; }

    /// gamma_u for 0-based indices; the empty set gives 1.
    double subset_weight(std::span<const std::size_t> u) const;

private:
    std::vector<double> log_order_{0.0};  // Gamma_0 .. Gamma_s
    std::vector<double> dim_;        // gamma_1 .. gamma_s
};

/// Riemann zeta for a > 1 via Euler-Maclaurin.
double zeta(double a);

/// theta(lambda) = 2 zeta(2 lambda) / (2 pi^2)^lambda for lambda in (1/2, 1].
double theta(double lambda);

double choose_lambda(double p0, double delta);

/// Gamma_l = (l!)^{2/(1+lambda)}, gamma_j = (b_j / sqrt(theta(lambda)))^{2/(1+lambda)}.
PodWeights pod_weights(const DecayModel& decay, double lambda);

/// sum over nonempty u in {1:s} of gamma_u^lambda theta(lambda)^|u|.
double weight_sum(const PodWeights& weights, double lambda, std::size_t s);

/// ((2/n) weight_sum)^{1/(2 lambda)} * norm_bound; n must be a power of 2.
double rms_error_bound(const PodWeights& weights, double lambda, std::uint64_t n,
                       std::size_t s, double norm_bound);

/// Upper bound on the weighted norm of G(u):
/// (kappa_norm g_norm / a_min) * (sum_u (|u|!)^2 prod b_j^2 / gamma_u)^{1/2}.
double norm_bound(const DecayModel& decay, const PodWeights& weights, double kappa_norm,
                  double g_norm, double a_min);

double predicted_rate(double p0, double delta);

/// Sum over all u in {1:s} (including the empty set) of
/// exp(log_order[|u|]) * prod_{j in u} x_j, for x_j >= 0, grouped by order
/// through the elementary symmetric polynomials of x. O(s^2).
double order_grouped_sum(std::span<const double> log_order, std::span<const double> x);

struct ConvergenceModel {
    double p0 = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    double rate = 0.0;
    // FEM regularity exponents and summability exponents; reported only.
    std::string t = "1";
    std::string t_prime = "1";
    std::string p1 = "n/a";
    std::string p_t = "n/a";
    std::string theta_indicator = "0";

    std::string describe() const;
};

ConvergenceModel make_convergence_model(double p0, double delta);

} // namespace qmcpde
