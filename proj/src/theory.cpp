#include "qmcpde/theory.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qmcpde {

double DecayModel::p0_sum() const {
    double s = 0.0;
    for (double v : b) s += std::pow(v, p0);
    return s;
}

PodWeights::PodWeights(std::vector<double> log_order, std::vector<double> dim)
    : log_order_(std::move(log_order)), dim_(std::move(dim)) {
    if (log_order_.size() != dim_.size() + 1)
        throw std::invalid_argument("POD weights need s+1 order factors for s dimension factors");
    if (log_order_.front() != 0.0) throw std::invalid_argument("Gamma_0 must equal 1");
    for (double v : log_order_)
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
            throw std::invalid_argument("order factors must be finite and non-negative");
    for (double g : dim_)
        if (!(g >= 0.0) || !std::isfinite(g))
            throw std::invalid_argument("dimension factors must be finite and non-negative");
}

PodWeights PodWeights::product(std::vector<double> dim) {
    std::vector<double> lo(dim.size() + 1, 0.0);
    return PodWeights(std::move(lo), std::move(dim));
}

double PodWeights::subset_weight(std::span<const std::size_t> u) const {
    double logw = log_order(u.size());
    double w = 1.0;
    for (auto j : u) w *= dim_.at(j);
    if (w == 0.0) return 0.0;
    return std::exp(logw + std::log(w));
}

double zeta(double a) {
    if (!(a > 1.0)) throw std::domain_error("zeta(a) needs a > 1");
    // B_2j / (2j)!
    static constexpr std::array<double, 8> kBernoulliOverFact = {
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
        -3617.0 / 10670622842880000.0,
    };
    constexpr int kTerms = 20;
    double head = 0.0;
    for (int k = kTerms - 1; k >= 1; --k) head += std::pow(k, -a);
    const double n = kTerms;
    double tail = std::pow(n, 1.0 - a) / (a - 1.0) + 0.5 * std::pow(n, -a);
    // Rising factorial a (a+1) ... (a+2j-2) times N^{-a-2j+1}.
    double rising = a;
    double npow = std::pow(n, -a - 1.0);
    for (std::size_t j = 0; j < kBernoulliOverFact.size(); ++j) {
        tail += kBernoulliOverFact[j] * rising * npow;
        rising *= (a + 2.0 * j + 1.0) * (a + 2.0 * j + 2.0);
        npow /= n * n;
    }
    return head + tail;
}

double theta(double lambda) {
    if (!(lambda > 0.5 && lambda <= 1.0))
        throw std::domain_error("theta(lambda) needs lambda in (1/2, 1]");
    constexpr double two_pi2 = 2.0 * std::numbers::pi * std::numbers::pi;
    return 2.0 * zeta(2.0 * lambda) / std::pow(two_pi2, lambda);
}

double choose_lambda(double p0, double delta) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw std::domain_error("p0 must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 0.5)) throw std::domain_error("delta must lie in (0, 1/2)");
    if (p0 <= 2.0 / 3.0) return 1.0 / (2.0 - 2.0 * delta);
    return p0 / (2.0 - p0);
}

PodWeights pod_weights(const DecayModel& decay, double lambda) {
    const double th = theta(lambda);
    const double expo = 2.0 / (1.0 + lambda);
    const std::size_t s = decay.dimension();
    std::vector<double> lo(s + 1);
    for (std::size_t l = 0; l <= s; ++l) lo[l] = expo * std::lgamma(static_cast<double>(l) + 1.0);
    lo[0] = 0.0;
    std::vector<double> g(s);
    const double scale = 1.0 / std::sqrt(th);
    for (std::size_t j = 0; j < s; ++j) {
        if (!(decay.b[j] >= 0.0)) throw std::invalid_argument("b_j must be non-negative");
        g[j] = std::pow(decay.b[j] * scale, expo);
    }
    return PodWeights(std::move(lo), std::move(g));
}

double order_grouped_sum(std::span<const double> log_order, std::span<const double> x) {
    const std::size_t s = x.size();
    if (log_order.size() < s + 1) throw std::invalid_argument("too few order factors");
    // e[l] = elementary symmetric polynomial of degree l in x_1..x_j.
    std::vector<double> e(s + 1, 0.0);
    e[0] = 1.0;
    std::size_t top = 0;
    for (std::size_t j = 0; j < s; ++j) {
        if (x[j] == 0.0) continue;
        ++top;
        for (std::size_t l = top; l >= 1; --l) e[l] += x[j] * e[l - 1];
    }
    double total = 0.0;
    for (std::size_t l = 0; l <= top; ++l) {
        if (e[l] == 0.0) continue;
        if (log_order[l] == -std::numeric_limits<double>::infinity()) continue;
        total += std::exp(log_order[l] + std::log(e[l]));
    }
    return total;
}

double weight_sum(const PodWeights& weights, double lambda, std::size_t s) {
    if (s > weights.dimension())
        throw std::invalid_argument("weights cover " + std::to_string(weights.dimension()) +
                                    " dimensions, need " + std::to_string(s));
    const double th = theta(lambda);
    const double log_th = std::log(th);
    std::vector<double> lo(s + 1);
    for (std::size_t l = 0; l <= s; ++l)
        lo[l] = lambda * weights.log_order(l) + static_cast<double>(l) * log_th;
    std::vector<double> x(s);
    for (std::size_t j = 0; j < s; ++j) x[j] = std::pow(weights.dim(j), lambda);
    const double total = order_grouped_sum(lo, x) - 1.0;
    if (!std::isfinite(total)) throw std::overflow_error("weight sum exceeds the double range");
    return total;
}

double rms_error_bound(const PodWeights& weights, double lambda, std::uint64_t n,
                       std::size_t s, double norm_bound) {
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("error bound requires n a power of 2");
    const double w = weight_sum(weights, lambda, s);
    return std::pow(2.0 / static_cast<double>(n) * w, 1.0 / (2.0 * lambda)) * norm_bound;
}

double norm_bound(const DecayModel& decay, const PodWeights& weights, double kappa_norm,
                  double g_norm, double a_min) {
    if (!(kappa_norm > 0.0 && g_norm > 0.0 && a_min > 0.0))
        throw std::invalid_argument("norm bound needs positive kappa, G norms and a_min");
    const std::size_t s = decay.dimension();
    if (weights.dimension() < s) throw std::invalid_argument("weights too short for decay");
    std::vector<double> x(s);
    std::size_t active = 0;
    for (std::size_t j = 0; j < s; ++j) {
        const double num = decay.b[j] * decay.b[j];
        if (num == 0.0) {
            x[j] = 0.0;
            continue;
        }
        if (weights.dim(j) == 0.0)
            throw std::domain_error("gamma_" + std::to_string(j + 1) + " = 0 with b_j != 0");
        x[j] = num / weights.dim(j);
        ++active;
    }
    std::vector<double> lo(s + 1);
    for (std::size_t l = 0; l <= s; ++l) {
        if (l > 0 && l <= active &&
            weights.log_order(l) == -std::numeric_limits<double>::infinity())
            throw std::domain_error("Gamma_" + std::to_string(l) + " = 0 with nonzero numerator");
        lo[l] = 2.0 * std::lgamma(static_cast<double>(l) + 1.0) - weights.log_order(l);
    }
    const double sum = order_grouped_sum(lo, x);
    if (!std::isfinite(sum)) throw std::overflow_error("norm bound sum exceeds the double range");
    return kappa_norm * g_norm / a_min * std::sqrt(sum);
}

double predicted_rate(double p0, double delta) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw std::domain_error("p0 must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 0.5)) throw std::domain_error("delta must lie in (0, 1/2)");
    return std::min(1.0 / p0 - 0.5, 1.0 - delta);
}

ConvergenceModel make_convergence_model(double p0, double delta) {
    ConvergenceModel m;
    m.p0 = p0;
    m.delta = delta;
    m.lambda = choose_lambda(p0, delta);
    m.rate = predicted_rate(p0, delta);
    return m;
}

std::string ConvergenceModel::describe() const {
    std::ostringstream os;
    os.precision(6);
    os << "p0=" << p0 << " delta=" << delta << " lambda=" << lambda << " rate=" << rate
       << " t=" << t << " t'=" << t_prime << " p1=" << p1 << " p_t=" << p_t
       << " theta_indicator=" << theta_indicator;
    return os.str();
}

} // namespace qmcpde
