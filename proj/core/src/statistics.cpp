#include "tailtest/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <boost/math/distributions/fisher_f.hpp>

#include "tailtest/error.hpp"

namespace tailtest {

std::string_view short_name(StatisticKind kind) noexcept {
  switch (kind) {
    case StatisticKind::sum_sum: return "SS";
    case StatisticKind::sum_robust_sum: return "SRS";
    case StatisticKind::max_sum: return "MS";
    case StatisticKind::max_robust_sum: return "MRS";
    case StatisticKind::dixon: return "D";
    case StatisticKind::weighted_spacings: return "DK";
  }
  return "?";
}

std::optional<StatisticKind> parse_statistic_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "ss") return StatisticKind::sum_sum;
  if (lower == "srs") return StatisticKind::sum_robust_sum;
  if (lower == "ms") return StatisticKind::max_sum;
  if (lower == "mrs") return StatisticKind::max_robust_sum;
  if (lower == "d" || lower == "dixon") return StatisticKind::dixon;
  if (lower == "dk") return StatisticKind::weighted_spacings;
  return std::nullopt;
}

std::string StatisticSpec::label() const {
  std::string out(short_name(kind));
  out += is_max_type() ? "(j=" : "(r=";
  out += std::to_string(rank);
  if (uses_trim()) out += ",m=" + std::to_string(trim);
  out += ")";
  return out;
}

void validate(const StatisticSpec& spec, std::size_t n) {
  const std::string name = spec.label();
  if (spec.rank < 1) throw Error(ErrorCode::spec, name + ": rank must be >= 1");
  if (spec.rank >= n) {
    throw Error(ErrorCode::spec, name + ": rank must be < n (n=" + std::to_string(n) + ")");
  }
  if (spec.uses_trim()) {
    if (spec.trim < 1) throw Error(ErrorCode::spec, name + ": trim m must be >= 1");
    if (spec.trim >= n) throw Error(ErrorCode::spec, name + ": trim m must be < n (n=" + std::to_string(n) + ")");
  } else if (spec.trim != 0) {
    throw Error(ErrorCode::spec, name + ": trim is only defined for SRS and MRS");
  }
}

std::vector<double> weighted_spacings(const OrderedSample& sample) {
  const auto x = sample.values();
  const std::size_t n = x.size();
  std::vector<double> z(n);
  for (std::size_t i = 0; i + 1 < n; ++i) z[i] = static_cast<double>(i + 1) * (x[i] - x[i + 1]);
  z[n - 1] = static_cast<double>(n) * x[n - 1];
  return z;
}

namespace {

double tail_sum(std::span<const double> x, std::size_t from) {
  return std::accumulate(x.begin() + static_cast<std::ptrdiff_t>(from), x.end(), 0.0);
}

double head_sum(std::span<const double> x, std::size_t count) {
  return std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(count), 0.0);
}

double ratio(double numerator, double denominator, const StatisticSpec& spec) {
  if (denominator == 0.0) {
    throw Error(ErrorCode::degenerate_denominator, spec.label() + ": denominator is zero");
  }
  return numerator / denominator;
}

}  // namespace

double compute_statistic(const StatisticSpec& spec, std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t r = spec.rank;
  const std::size_t m = spec.trim;
  switch (spec.kind) {
    case StatisticKind::sum_sum:
      return ratio(head_sum(x, r), tail_sum(x, 0), spec);
    case StatisticKind::sum_robust_sum:
      return ratio(head_sum(x, r), tail_sum(x, m), spec);
    case StatisticKind::max_sum:
      return ratio(x[r - 1], tail_sum(x, r - 1), spec);
    case StatisticKind::max_robust_sum:
      return ratio(x[r - 1], tail_sum(x, m), spec);
    case StatisticKind::dixon:
      return ratio(x[0], x[r], spec);
    case StatisticKind::weighted_spacings: {
      double top = 0.0;
      double rest = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = (i + 1 < n) ? static_cast<double>(i + 1) * (x[i] - x[i + 1]) : static_cast<double>(n) * x[i];
        (i < r ? top : rest) += z;
      }
      return ratio(top, rest, spec);
    }
  }
  throw Error(ErrorCode::spec, "unknown statistic kind");
}

double compute_statistic(const StatisticSpec& spec, const OrderedSample& sample, StatisticOptions options) {
  validate(spec, sample.size());
  if (options.verify_order && !is_descending(sample.values())) {
    std::vector<double> sorted(sample.values().begin(), sample.values().end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    return compute_statistic(spec, std::span<const double>(sorted));
  }
  return compute_statistic(spec, sample.values());
}

double dk_normalized(double statistic, std::size_t r, std::size_t n) {
  if (r < 1 || r >= n) throw Error(ErrorCode::spec, "DK normalization needs 1 <= r < n");
  return statistic * static_cast<double>(n - r) / static_cast<double>(r);
}

double dk_p_value(double statistic, std::size_t r, std::size_t n) {
  if (!(statistic >= 0.0)) throw Error(ErrorCode::parameter_domain, "DK statistic must be >= 0");
  const double x = dk_normalized(statistic, r, n);
  if (std::isinf(x)) return 0.0;
  const boost::math::fisher_f_distribution<double> law(2.0 * static_cast<double>(r),
                                                       2.0 * static_cast<double>(n - r));
  return boost::math::cdf(boost::math::complement(law, x));
}

}  // namespace tailtest
