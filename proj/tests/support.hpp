#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tailtest/ordered_sample.hpp"
#include "tailtest/rng.hpp"
#include "tailtest/statistics.hpp"

namespace tailtest::testing {

/// Hand-rolled generators for property tests. Each case i of a property draws
/// from RngStream::derive(seed, i), so a failing case can be replayed alone.
class Gen {
 public:
  explicit Gen(std::uint64_t seed, std::uint64_t index) : rng_(RngStream::derive(seed, index)) {}

  RngStream& rng() { return rng_; }

  std::size_t size(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng_() % (hi - lo + 1));
  }

  double real(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }

  /// Positive sample mixing Exponential, Pareto-excess and uniform shapes,
  /// occasionally with a planted large value.
  OrderedSample positive_sample(std::size_t n) {
    std::vector<double> v(n);
    const auto shape = rng_() % 3;
    for (auto& x : v) {
      switch (shape) {
        case 0: x = rng_.exponential(); break;
        case 1: x = std::pow(rng_.uniform(), -1.0 / real(0.8, 3.0)) - 1.0 + 1e-3; break;
        default: x = real(0.01, 10.0); break;
      }
    }
    if (rng_() % 4 == 0) v[rng_() % n] *= real(5.0, 50.0);
    return OrderedSample(std::move(v));
  }

  OrderedSample exponential_sample(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng_.exponential();
    return OrderedSample(std::move(v));
  }

  /// A spec valid for samples of size n (n >= 4).
  StatisticSpec spec(std::size_t n) {
    const auto kind = static_cast<StatisticKind>(rng_() % 6);
    const std::size_t r = size(1, std::max<std::size_t>(1, std::min<std::size_t>(n / 2, 6)));
    const std::size_t m = size(r, std::min(n - 2, r + 4));
    switch (kind) {
      case StatisticKind::sum_sum: return StatisticSpec::ss(r);
      case StatisticKind::sum_robust_sum: return StatisticSpec::srs(r, m);
      case StatisticKind::max_sum: return StatisticSpec::ms(r);
      case StatisticKind::max_robust_sum: return StatisticSpec::mrs(r, m);
      case StatisticKind::dixon: return StatisticSpec::dixon(r);
      case StatisticKind::weighted_spacings: return StatisticSpec::dk(r);
    }
    return StatisticSpec::ss(r);
  }

 private:
  RngStream rng_;
};

/// Largest gap between the empirical CDF of `values` and `cdf`.
template <typename Cdf>
double ks_distance(std::vector<double> values, Cdf&& cdf) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline constexpr StatisticKind kAllKinds[] = {
    StatisticKind::sum_sum, StatisticKind::sum_robust_sum, StatisticKind::max_sum,
    StatisticKind::max_robust_sum, StatisticKind::dixon, StatisticKind::weighted_spacings,
};

}  // namespace tailtest::testing
