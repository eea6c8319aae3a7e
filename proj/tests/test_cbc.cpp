#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmcpde/cbc.hpp"

using namespace qmcpde;

namespace {

oracle::Pod as_oracle(const PodWeights& w) {
    oracle::Pod p;
    for (std::size_t l = 0; l <= w.dimension(); ++l) p.order.push_back(w.order(l));
    p.dim = w.dims();
    return p;
}

PodWeights decay_weights(std::size_t s, double lambda = 0.75, double scale = 1.0) {
    DecayModel d;
    for (std::size_t j = 1; j <= s; ++j)
        d.b.push_back(scale * 0.1 * std::pow(j, -3.0) / std::log(j + 1.0));
    d.p0 = 0.4;
    return pod_weights(d, lambda);
}

} // namespace

TEST_CASE("kernel values") {
    CHECK(kernel_b2(0.0) == doctest::Approx(1.0 / 6.0));
    CHECK(kernel_b2(0.5) == doctest::Approx(-1.0 / 12.0));
    CHECK(kernel_b2(0.25) == doctest::Approx(kernel_b2(0.75)));
}

TEST_CASE("hand values of the worst-case error") {
    const auto unit = PodWeights::product({1.0});
    CHECK(wce_squared(LatticeRule(1, {0}), unit) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(wce_squared(LatticeRule(2, {1}), unit) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
}

TEST_CASE("worst-case error matches subset enumeration") {
    for (std::uint64_t n : {8u, 32u, 64u})
        for (std::size_t s : {1u, 4u, 7u, 10u}) {
            const auto w = decay_weights(s, 0.7, 20.0);
            std::vector<std::uint64_t> z;
            for (std::size_t j = 0; j < s; ++j) z.push_back((2 * (j * 7 + 3) + 1) % n);
            const LatticeRule rule(n, z);
            const double ref = oracle::wce2(z, n, as_oracle(w));
            CHECK(std::fabs(wce_squared(rule, w) - ref) <= 1e-11 * ref);
        }
}

TEST_CASE("naive CBC equals greedy subset-sum search") {
    for (std::uint64_t n : {8u, 16u, 32u})
        for (std::size_t s : {1u, 3u, 6u}) {
            const auto w = decay_weights(s, 0.8, 30.0);
            const auto res = cbc_naive(n, s, w);
            CHECK(res.rule.generator() == oracle::cbc(n, s, as_oracle(w)));
            const double ref = oracle::wce2(res.rule.generator(), n, as_oracle(w));
            CHECK(res.wce2 == doctest::Approx(ref).epsilon(1e-11));
            REQUIRE(res.wce2_by_dim.size() == s);
            CHECK(res.wce2_by_dim.back() == res.wce2);
        }
}

TEST_CASE("fast CBC is identical to naive CBC") {
    for (std::uint64_t n : {1u, 2u, 4u, 8u, 16u, 64u, 256u, 1024u})
        for (std::size_t s : {1u, 2u, 5u, 12u}) {
            for (const auto& w : {decay_weights(s), PodWeights::product(std::vector<double>(s, 0.5)),
                                  decay_weights(s, 1.0, 100.0)}) {
                const auto a = cbc_naive(n, s, w);
                const auto b = cbc_fast(n, s, w);
                CHECK(a.rule == b.rule);
                CHECK(a.wce2 == b.wce2);
                CHECK(a.wce2_by_dim == b.wce2_by_dim);
            }
        }
}

TEST_CASE("CBC basic properties") {
    const auto r1 = cbc_fast(1024, 1, decay_weights(1));
    CHECK(r1.rule.generator() == std::vector<std::uint64_t>{1});

    const auto w = decay_weights(20);
    const auto res = cbc_fast(512, 20, w);
    for (auto z : res.rule.generator()) CHECK(z % 2 == 1);
    for (std::size_t d = 1; d < 20; ++d) CHECK(res.wce2_by_dim[d] >= res.wce2_by_dim[d - 1] - 1e-18);
    CHECK(res.wce2 == doctest::Approx(wce_squared(res.rule, w)).epsilon(1e-12));
    CHECK(std::isfinite(res.wce2));
    CHECK(res.wce2 > 0.0);

    const auto again = cbc_fast(512, 20, w);
    CHECK(again.rule == res.rule);
    CHECK(again.checksum == res.checksum);

    // Zero weights from some dimension on fix the remaining components.
    const auto zw = PodWeights::product({0.5, 0.0, 0.0});
    const auto zr = cbc_fast(64, 3, zw);
    CHECK(zr.rule.generator()[1] == 1);
}

TEST_CASE("error decays with n for product weights") {
    const auto w = PodWeights::product({1.0, 0.5, 0.25, 0.125});
    double prev = INFINITY;
    for (std::uint64_t n = 16; n <= 4096; n *= 2) {
        const double e = cbc_fast(n, 4, w).wce2;
        CHECK(e < prev);
        prev = e;
    }
}
