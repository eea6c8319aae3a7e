#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qmcpde/io.hpp"
#include "qmcpde/points.hpp"

using namespace qmcpde;

TEST_CASE("lattice points are frac(i z / n)") {
    const LatticeRule rule(4, {1, 3});
    const auto block = generate_block(rule, std::vector<double>(2, 0.0));
    const double expect[4][2] = {{0, 0}, {0.25, 0.75}, {0.5, 0.5}, {0.75, 0.25}};
    REQUIRE(block.rows == 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 2; ++j) CHECK(block.row(i)[j] == expect[i][j]);

    const std::vector<double> shift{0.9, 0.3};
    const auto p = lattice_point(rule, 3, shift);
    CHECK(p[0] == doctest::Approx(0.65).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.55).epsilon(1e-15));
    const auto shifted = generate_block(rule, shift);
    for (std::size_t i = 0; i < 4; ++i)
        for (double v : shifted.row(i)) {
            CHECK(v >= 0.0);
            CHECK(v < 1.0);
        }
}

TEST_CASE("lattice rule validation") {
    CHECK_THROWS_AS(LatticeRule(6, {1}), std::invalid_argument);
    CHECK_THROWS_AS(LatticeRule(8, {2}), std::invalid_argument);
    CHECK_THROWS_AS(LatticeRule(8, {9}), std::invalid_argument);
    const LatticeRule rule(8, {1, 3});
    CHECK_THROWS(lattice_point(rule, 8, std::vector<double>(2, 0.0)));
    CHECK_THROWS(lattice_point(rule, 0, std::vector<double>(3, 0.0)));
    CHECK(is_power_of_two(1));
    CHECK(is_power_of_two(1024));
    CHECK_FALSE(is_power_of_two(0));
    CHECK_FALSE(is_power_of_two(12));
}

TEST_CASE("shifts are reproducible and uniform") {
    const auto a = draw_shifts(4, 3, 42);
    const auto b = draw_shifts(4, 3, 42);
    const auto c = draw_shifts(4, 3, 43);
    CHECK(a.shifts == b.shifts);
    CHECK(a.shifts != c.shifts);
    CHECK(draw_shift(2, 3, 42) == a.shifts[2]);

    for (std::uint64_t seed : {0u, 1u, 12345u}) {
        const auto big = draw_shifts(1u << 16, 1, seed);
        double sum = 0.0;
        for (const auto& s : big.shifts) {
            CHECK(s[0] >= 0.0);
            CHECK(s[0] < 1.0);
            sum += s[0];
        }
        CHECK(std::fabs(sum / 65536.0 - 0.5) < 0.01);
    }
}

TEST_CASE("inverse normal CDF against a long double CDF") {
    CHECK(inv_normal_cdf(0.5) == 0.0);
    CHECK(inv_normal_cdf(0.9772498680518207927997173628334665625282) ==
          doctest::Approx(2.0).epsilon(1e-13));
    CHECK(inv_normal_cdf(0.1586552539314570514147674543679620775221) ==
          doctest::Approx(-1.0).epsilon(1e-13));

    // w = Phi(x) is exact enough in double for x <= 5.
    for (double x = -8.0; x <= 5.0; x += 0.125) {
        const double w = static_cast<double>(oracle::phi(x));
        CHECK(std::fabs(inv_normal_cdf(w) - x) < 1e-10);
    }
    // Odd symmetry wherever 1 - w is exact.
    for (int k = 1; k < 4096; ++k) {
        const double w = k / 8192.0;
        CHECK(inv_normal_cdf(w) == -inv_normal_cdf(1.0 - w));
    }
    for (double w = 1e-300; w < 1e-3; w *= 7.3) {
        CHECK(std::isfinite(inv_normal_cdf(w)));
        CHECK(inv_normal_cdf(w) < -3.0);
    }
    double prev = -INFINITY;
    for (double w = 1e-6; w < 1.0; w += 1e-3) {
        const double v = inv_normal_cdf(w);
        CHECK(v > prev);
        prev = v;
    }
    CHECK_THROWS_AS(inv_normal_cdf(0.0), std::domain_error);
    CHECK_THROWS_AS(inv_normal_cdf(1.0), std::domain_error);
    CHECK_THROWS_AS(inv_normal_cdf(NAN), std::domain_error);
}

TEST_CASE("oracle Phi matches frozen reference values") {
    CHECK(static_cast<double>(oracle::phi(2.0L)) ==
          doctest::Approx(0.9772498680518207927997173628334665625282).epsilon(1e-15));
    CHECK(static_cast<double>(oracle::phi(-1.0L)) ==
          doctest::Approx(0.1586552539314570514147674543679620775221).epsilon(1e-15));
    CHECK(static_cast<double>(oracle::phi(1.0L)) ==
          doctest::Approx(0.8413447460685429485852325456320379224779).epsilon(1e-15));
}

TEST_CASE("maps to the parameter domain") {
    const std::vector<double> t{0.0, 0.25, 0.5};
    CHECK(map_uniform(t) == std::vector<double>{-0.5, -0.25, 0.0});
    const auto y = map_lognormal(std::vector<double>{0.5, 0.8413447460685429});
    CHECK(y[0] == 0.0);
    CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(map_lognormal(std::vector<double>{0.0}), std::domain_error);
}

TEST_CASE("identity generating matrices give the radical inverse") {
    for (unsigned m : {1u, 3u, 6u}) {
        const auto mats = GeneratingMatrices::identity(2, m, 32);
        for (std::uint64_t i = 0; i < mats.size(); ++i) {
            const auto p = digital_point(mats, i);
            CHECK(p[0] == oracle::radical_inverse(i, 32));
            CHECK(p[1] == p[0]);
        }
    }
    const auto mats = GeneratingMatrices::identity(1, 3, 3);
    const double expect[8] = {0, 0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875};
    for (std::uint64_t i = 0; i < 8; ++i) CHECK(digital_point(mats, i)[0] == expect[i]);
}

TEST_CASE("Gray-code block equals pointwise evaluation") {
    const GeneratingMatrices mats(5, 20,
                                  {{0x80000, 0x40000, 0x20000, 0x10000, 0x8000},
                                   {0x80000, 0xC0000, 0xA0000, 0xF0000, 0x88000}});
    const auto block = digital_block(mats);
    REQUIRE(block.rows == 32);
    for (std::uint64_t i = 0; i < 32; ++i) {
        const auto p = digital_point(mats, i);
        CHECK(block.row(i)[0] == p[0]);
        CHECK(block.row(i)[1] == p[1]);
    }
    CHECK_THROWS(GeneratingMatrices(3, 4, {{1, 2, 16}}));
}

TEST_CASE("generating vector and matrix files round trip") {
    const std::vector<std::uint64_t> z{1, 433461, 315689, 441789};
    std::stringstream ss;
    write_generating_vector(ss, z);
    CHECK(read_generating_vector(ss) == z);

    std::istringstream commented("# header\n1\n\n  3 \n# tail\n");
    CHECK(read_generating_vector(commented) == std::vector<std::uint64_t>{1, 3});

    std::istringstream bad("1\n3\nx7\n");
    try {
        read_generating_vector(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    const auto mats = GeneratingMatrices::identity(3, 4, 8);
    std::stringstream ms;
    write_generating_matrices(ms, mats);
    CHECK(read_generating_matrices(ms) == mats);
}

TEST_CASE("shortest round-trip formatting") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 6.02e23, -0.0, 0.75})
        CHECK(std::stod(format_double(x)) == x);
    CHECK(format_double(0.5) == "0.5");
}
