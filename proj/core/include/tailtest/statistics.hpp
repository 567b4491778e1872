#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailtest/ordered_sample.hpp"

namespace tailtest {

/// The six upper-outlier statistics. All are ratios of degree-one forms in
/// the order statistics, so their null law under Exp(alpha) is free of alpha.
enum class StatisticKind {
  sum_sum,             ///< SS:  sum_{i<=r} x_(i) / sum_{i<=n} x_(i)
  sum_robust_sum,      ///< SRS: sum_{i<=r} x_(i) / sum_{i>m} x_(i)
  max_sum,             ///< MS:  x_(j) / sum_{i>=j} x_(i)
  max_robust_sum,      ///< MRS: x_(j) / sum_{i>m} x_(i)
  dixon,               ///< D:   x_(1) / x_(r+1)
  weighted_spacings,   ///< DK:  sum_{i<=r} z_i / sum_{i>r} z_i
};

std::string_view short_name(StatisticKind kind) noexcept;   ///< "SS", "SRS", ...
std::optional<StatisticKind> parse_statistic_kind(std::string_view text);

/// Statistic plus its parameters. `rank` is r for SS/SRS/D/DK and j for
/// MS/MRS; `trim` is m for SRS/MRS and unused (0) otherwise.
struct StatisticSpec {
  StatisticKind kind = StatisticKind::sum_sum;
  std::size_t rank = 1;
  std::size_t trim = 0;

  static StatisticSpec ss(std::size_t r) { return {StatisticKind::sum_sum, r, 0}; }
  static StatisticSpec srs(std::size_t r, std::size_t m) { return {StatisticKind::sum_robust_sum, r, m}; }
  static StatisticSpec ms(std::size_t j) { return {StatisticKind::max_sum, j, 0}; }
  static StatisticSpec mrs(std::size_t j, std::size_t m) { return {StatisticKind::max_robust_sum, j, m}; }
  static StatisticSpec dixon(std::size_t r) { return {StatisticKind::dixon, r, 0}; }
  static StatisticSpec dk(std::size_t r) { return {StatisticKind::weighted_spacings, r, 0}; }

  /// Spec of the same family at another rank; the rank-j member used by
  /// sequential procedures.
  StatisticSpec at_rank(std::size_t j) const { return {kind, j, trim}; }

  bool uses_trim() const noexcept {
    return kind == StatisticKind::sum_robust_sum || kind == StatisticKind::max_robust_sum;
  }
  bool is_max_type() const noexcept {
    return kind == StatisticKind::max_sum || kind == StatisticKind::max_robust_sum;
  }

  /// e.g. "MRS(j=1,m=10)".
  std::string label() const;

  auto operator<=>(const StatisticSpec&) const = default;
};

/// Throws ErrorCode::spec unless the spec can be evaluated on a sample of size n.
void validate(const StatisticSpec& spec, std::size_t n);

/// z_i = i (x_(i) - x_(i+1)) for i < n, z_n = n x_(n).
std::vector<double> weighted_spacings(const OrderedSample& sample);

struct StatisticOptions {
  /// Re-sort defensively before evaluating. OrderedSample already guarantees
  /// order, so this only matters for callers that bypass it.
  bool verify_order = false;
};

/// Evaluates the statistic. Throws ErrorCode::spec on spec/n mismatch and
/// ErrorCode::degenerate_denominator when the denominator is zero.
double compute_statistic(const StatisticSpec& spec, const OrderedSample& sample, StatisticOptions options = {});

/// Same as compute_statistic on a raw descending span (no validation of order).
double compute_statistic(const StatisticSpec& spec, std::span<const double> descending);

/// Upper tail of F(2r, 2(n-r)) at T (n-r)/r; the closed-form null for DK.
double dk_p_value(double statistic, std::size_t r, std::size_t n);

/// The mean-scaled DK value T (n-r)/r that follows F(2r, 2(n-r)) under the null.
double dk_normalized(double statistic, std::size_t r, std::size_t n);

}  // namespace tailtest
