#include "stylo/stats.hpp"

#include "stylo/error.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stylo {

std::string_view to_string(CorrelationKind k)
{
    return k == CorrelationKind::pearson ? "pearson_r" : "spearman_rho";
}

std::vector<double> average_ranks(std::span<const double> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });

    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i + 1;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        // positions i..j-1 hold ranks i+1..j
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
        i = j;
    }
    return ranks;
}

namespace {

double pearson(std::span<const double> x, std::span<const double> y)
{
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw DataError("correlation: zero-variance input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool constant(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

} // namespace

StatResult correlation(std::span<const double> x, std::span<const double> y, CorrelationKind kind)
{
    if (x.size() != y.size())
        throw DataError(fmt::format("correlation: sizes differ ({} vs {})", x.size(), y.size()));
    if (x.size() < 3) throw DataError("correlation: need at least 3 points");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("correlation: non-finite input");
    if (constant(x) || constant(y)) throw DataError("correlation: zero-variance input");

    StatResult res;
    res.kind = kind;
    if (kind == CorrelationKind::pearson) {
        res.value = pearson(x, y);
    } else {
        const auto rx = average_ranks(x);
        const auto ry = average_ranks(y);
        res.value = pearson(rx, ry);
    }

    const auto dof = static_cast<double>(x.size() - 2);
    if (std::abs(res.value) >= 1.0) {
        res.p_value = 0.0;
    } else {
        const double t = res.value * std::sqrt(dof / (1.0 - res.value * res.value));
        const boost::math::students_t dist(dof);
        res.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    return res;
}

double wald_halfwidth(double p, std::size_t n)
{
    if (n == 0) return 0.0;
    return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

} // namespace stylo
