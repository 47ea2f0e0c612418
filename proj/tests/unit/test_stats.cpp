#include "stylo/stats.hpp"

#include "stylo/error.hpp"
#include "stylo/rng.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace stylo;

TEST_CASE("correlation examples")
{
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{1, 3, 2, 4};
    const auto rho = correlation(x, y, CorrelationKind::spearman);
    CHECK(rho.value == doctest::Approx(0.8).epsilon(1e-14));
    // with two degrees of freedom the two-sided p-value is 1 - |r|
    REQUIRE(rho.p_value);
    CHECK(*rho.p_value == doctest::Approx(0.2).epsilon(1e-10));

    std::vector<double> lin, neg;
    for (const double v : x) {
        lin.push_back(2 * v + 1);
        neg.push_back(-v);
    }
    CHECK(correlation(x, lin, CorrelationKind::pearson).value == 1.0);
    CHECK(correlation(x, neg, CorrelationKind::pearson).value == -1.0);
    CHECK(correlation(x, lin, CorrelationKind::pearson).p_value == 0.0);
}

TEST_CASE("p-value with one degree of freedom")
{
    // n = 3: p = 1 - (2 / pi) atan(|t|)
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> y{1, 3, 2};
    const auto r = correlation(x, y, CorrelationKind::pearson);
    CHECK(r.value == doctest::Approx(0.5));
    const double t = 0.5 * std::sqrt(1.0 / 0.75);
    CHECK(*r.p_value == doctest::Approx(1.0 - 2.0 / std::numbers::pi * std::atan(t)).epsilon(1e-10));
}

TEST_CASE("correlation matches the oracle and is affine invariant")
{
    Rng rng(4);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = 3 + rng.uniform(20);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<double>(rng.uniform(6)); // ties on purpose
            y[i] = rng.uniform_real() + 0.3 * x[i];
        }
        if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; })) continue;
        const auto p = correlation(x, y, CorrelationKind::pearson);
        const auto s = correlation(x, y, CorrelationKind::spearman);
        CHECK(std::abs(p.value - oracle::pearson(x, y)) < 1e-12);
        CHECK(std::abs(s.value - oracle::spearman(x, y)) < 1e-12);
        CHECK(average_ranks(x) == oracle::ranks(x));
        CHECK(*p.p_value >= 0.0);
        CHECK(*p.p_value <= 1.0);

        const double a = 0.1 + rng.uniform_real() * 50.0, b = rng.uniform_real() * 100.0 - 50.0;
        std::vector<double> ax;
        for (const double v : x) ax.push_back(a * v + b);
        CHECK(std::abs(correlation(ax, y, CorrelationKind::pearson).value - p.value) < 1e-12);
        CHECK(correlation(ax, y, CorrelationKind::spearman).value == s.value);
    }
}

TEST_CASE("correlation errors")
{
    const std::vector<double> a{1, 2, 3}, flat{2, 2, 2}, two{1, 2}, four{1, 2, 3, 4};
    CHECK_THROWS_AS(correlation(a, flat, CorrelationKind::pearson), DataError);
    CHECK_THROWS_AS(correlation(flat, a, CorrelationKind::spearman), DataError);
    CHECK_THROWS_AS(correlation(two, two, CorrelationKind::pearson), DataError);
    CHECK_THROWS_AS(correlation(a, four, CorrelationKind::pearson), DataError);
}

TEST_CASE("average ranks and Wald half-width")
{
    const std::vector<double> v{10, 20, 20, 5};
    CHECK(average_ranks(v) == std::vector<double>{2, 3.5, 3.5, 1});
    CHECK(wald_halfwidth(0.5, 100) == doctest::Approx(0.098));
    CHECK(wald_halfwidth(1.0, 100) == 0.0);
    CHECK(wald_halfwidth(0.3, 0) == 0.0);
}
