#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qmcpde/theory.hpp"

using namespace qmcpde;

namespace {

oracle::Pod as_oracle(const PodWeights& w) {
    oracle::Pod p;
    for (std::size_t l = 0; l <= w.dimension(); ++l) p.order.push_back(w.order(l));
    p.dim = w.dims();
    return p;
}

DecayModel log_decay(std::size_t s) {
    DecayModel d;
    for (std::size_t j = 1; j <= s; ++j) d.b.push_back(0.1 * std::pow(j, -3.0) / std::log(j + 1.0));
    d.p0 = 0.4;
    return d;
}

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

} // namespace

TEST_CASE("zeta and theta against frozen references") {
    CHECK(rel(zeta(1.5), 2.612375348685488343348567567924071630571) < 1e-13);
    CHECK(rel(zeta(2.0), std::numbers::pi * std::numbers::pi / 6.0) < 1e-14);
    CHECK(rel(theta(1.0), 1.0 / 6.0) < 1e-14);
    CHECK(rel(theta(0.75), 0.5579152940491536654999763616980783485885) < 1e-12);
    CHECK(rel(theta(0.6), 1.867957037976602079345468064184316317237) < 1e-12);
    CHECK_THROWS_AS(theta(0.5), std::domain_error);
    CHECK_THROWS_AS(theta(1.01), std::domain_error);
}

TEST_CASE("theta decreases on (1/2, 1]") {
    double prev = INFINITY;
    for (int k = 1; k <= 100; ++k) {
        const double v = theta(0.5 + 0.005 * k);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("choose_lambda branches") {
    CHECK(choose_lambda(0.5, 0.25) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(choose_lambda(0.8, 0.1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(choose_lambda(2.0 / 3.0, 0.1) == doctest::Approx(1.0 / 1.8).epsilon(1e-15));
    for (double p0 = 0.05; p0 < 1.0; p0 += 0.05)
        for (double delta : {0.01, 0.1, 0.3, 0.49}) {
            const double l = choose_lambda(p0, delta);
            CHECK(l > 0.5);
            CHECK(l < 1.0);
            CHECK(l >= p0 / (2.0 - p0) - 1e-15);
        }
    CHECK_THROWS(choose_lambda(1.0, 0.1));
    CHECK_THROWS(choose_lambda(0.5, 0.5));
}

TEST_CASE("pod weight examples") {
    const auto w1 = pod_weights(DecayModel{{0.1}, 0.5}, 1.0);
    CHECK(w1.order(0) == 1.0);
    CHECK(rel(w1.dim(0), 0.2449489742783178098197284074705891391966) < 1e-15);

    const auto w2 = pod_weights(DecayModel{{0.1, 0.05}, 0.5}, 1.0);
    const std::size_t both[] = {0, 1};
    CHECK(rel(w2.subset_weight(both), 0.06) < 1e-15);
    CHECK(w2.subset_weight({}) == 1.0);
}

TEST_CASE("pod weights reconstruct the closed form") {
    const auto decay = log_decay(20);
    std::mt19937_64 rng(7);
    for (double lambda : {0.6, 0.75, 1.0}) {
        const auto w = pod_weights(decay, lambda);
        const double th = theta(lambda);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<std::size_t> u;
            for (std::size_t j = 0; j < 20 && u.size() < 10; ++j)
                if (rng() % 3 == 0) u.push_back(j);
            double prod = std::tgamma(u.size() + 1.0);
            for (auto j : u) prod *= decay.b[j] / std::sqrt(th);
            CHECK(rel(w.subset_weight(u), std::pow(prod, 2.0 / (1.0 + lambda))) < 1e-12);
        }
    }
}

TEST_CASE("weight_sum matches subset enumeration") {
    CHECK(rel(weight_sum(PodWeights::product({0.3}), 0.7, 1), std::pow(0.3, 0.7) * theta(0.7)) < 1e-14);
    {
        const auto w = PodWeights::product({0.5, 0.2});
        const double t = theta(0.8);
        const double expect = (1 + t * std::pow(0.5, 0.8)) * (1 + t * std::pow(0.2, 0.8)) - 1;
        CHECK(rel(weight_sum(w, 0.8, 2), expect) < 1e-14);
    }
    for (std::size_t s = 1; s <= 12; ++s)
        for (double lambda : {0.55, 0.75, 1.0}) {
            auto decay = log_decay(s);
            for (auto& b : decay.b) b *= 30.0;  // make higher orders matter
            const auto w = pod_weights(decay, lambda);
            const double ref = oracle::weight_sum(as_oracle(w), lambda, theta(lambda), s);
            CHECK(rel(weight_sum(w, lambda, s), ref) < 1e-12);
        }
}

TEST_CASE("norm_bound matches subset enumeration") {
    CHECK(norm_bound(DecayModel{{0.0, 0.0}, 0.5}, PodWeights::product({1.0, 1.0}), 2.0, 3.0, 0.5) ==
          doctest::Approx(12.0).epsilon(1e-15));
    CHECK(norm_bound(DecayModel{{0.1}, 0.5}, PodWeights::product({0.01}), 1.0, 1.0, 1.0) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    for (std::size_t s = 1; s <= 12; ++s) {
        auto decay = log_decay(s);
        for (auto& b : decay.b) b *= 10.0;
        const auto w = pod_weights(decay, 0.7);
        const double ref = oracle::norm_bound(decay.b, as_oracle(w), 0.3, 0.2, 0.8);
        CHECK(rel(norm_bound(decay, w, 0.3, 0.2, 0.8), ref) < 1e-12);
    }
    CHECK_THROWS(norm_bound(DecayModel{{0.1}, 0.5}, PodWeights::product({0.0}), 1.0, 1.0, 1.0));
}

TEST_CASE("rms_error_bound scaling") {
    const auto w = PodWeights::product({1.0});
    CHECK(rms_error_bound(w, 1.0, 2, 1, 1.0) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
    const auto decay = log_decay(10);
    const auto pw = pod_weights(decay, 0.7);
    const double a = rms_error_bound(pw, 0.7, 256, 10, 1.5);
    const double b = rms_error_bound(pw, 0.7, 512, 10, 1.5);
    CHECK(b / a == doctest::Approx(std::pow(2.0, -1.0 / 1.4)).epsilon(1e-13));
    CHECK_THROWS(rms_error_bound(pw, 0.7, 100, 10, 1.0));
}

TEST_CASE("predicted rate") {
    CHECK(predicted_rate(0.5, 0.1) == doctest::Approx(0.9));
    CHECK(predicted_rate(0.9, 0.01) == doctest::Approx(1.0 / 0.9 - 0.5));
    CHECK(predicted_rate(0.4, 1e-6) == doctest::Approx(1.0).epsilon(1e-5));
    const auto model = make_convergence_model(0.4, 0.1);
    CHECK(model.lambda == choose_lambda(0.4, 0.1));
    CHECK(model.rate == predicted_rate(0.4, 0.1));
    CHECK_FALSE(model.describe().empty());
}

TEST_CASE("weight_sum increments shrink with s") {
    const double p0 = 0.4, delta = 0.1;
    const double lambda = choose_lambda(p0, delta);
    DecayModel decay;
    for (std::size_t j = 1; j <= 2048; ++j) decay.b.push_back(0.5 * std::pow(j, -3.0));
    decay.p0 = p0;
    const auto w = pod_weights(decay, lambda);
    double prev_inc = INFINITY, prev = 0.0;
    for (int k = 4; k <= 10; ++k) {
        const std::size_t s = std::size_t{1} << k;
        const double ws = weight_sum(w, lambda, s), w2s = weight_sum(w, lambda, 2 * s);
        CHECK(w2s >= ws);
        CHECK(ws >= prev);
        CHECK(w2s - ws <= prev_inc);
        prev_inc = w2s - ws;
        prev = ws;
    }
}

TEST_CASE("order_grouped_sum against direct enumeration") {
    const std::vector<double> log_order{0.0, 0.3, -0.2, 1.1};
    const std::vector<double> x{0.5, 2.0, 0.25};
    double direct = 0.0;
    for (unsigned u = 0; u < 8; ++u) {
        double p = std::exp(log_order[oracle::popcount(u)]);
        for (int j = 0; j < 3; ++j)
            if (u >> j & 1) p *= x[j];
        direct += p;
    }
    CHECK(order_grouped_sum(log_order, x) == doctest::Approx(direct).epsilon(1e-14));
}
