#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace stylo {

enum class CorrelationKind { pearson, spearman };

std::string_view to_string(CorrelationKind k);

struct StatResult {
    CorrelationKind kind = CorrelationKind::pearson;
    double value = 0.0;            ///< clamped to [-1, 1]
    std::optional<double> p_value; ///< two-sided, t approximation with n - 2 dof
};

/// Pearson r or Spearman rho (Pearson on average ranks). The p-value uses
/// t = r * sqrt((n - 2) / (1 - r^2)) against Student's t with n - 2 degrees
/// of freedom; |r| = 1 gives p = 0.
/// Throws DataError when sizes differ, n < 3 or either input is constant.
StatResult correlation(std::span<const double> x, std::span<const double> y, CorrelationKind kind);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Wald 95% half-width 1.96 * sqrt(p (1 - p) / n); 0 when n = 0.
double wald_halfwidth(double p, std::size_t n);

} // namespace stylo
