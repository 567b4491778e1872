#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "tailtest/distributions.hpp"
#include "tailtest/error.hpp"
#include "tailtest/statistics.hpp"

namespace tailtest {
namespace {

using testing::Gen;

const OrderedSample kHand({4, 2, 1, 1});

TEST(Spacings, HandValues) {
  EXPECT_EQ(weighted_spacings(kHand), (std::vector<double>{2, 2, 0, 4}));
  EXPECT_EQ(weighted_spacings(OrderedSample({3.5})), (std::vector<double>{3.5}));
}

TEST(Spacings, NonnegativeAndTelescoping) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    Gen g(0x5bac, i);
    const auto s = g.positive_sample(g.size(1, 200));
    const auto z = weighted_spacings(s);
    for (double v : z) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(std::accumulate(z.begin(), z.end(), 0.0), s.sum(), 1e-10 * s.sum());
  }
}

TEST(Spacings, RenyiIidExponential) {
  RngStream rng(77);
  const double alpha = 2.5;
  std::vector<double> pooled;
  for (int i = 0; i < 10'000; ++i) {
    const auto z = weighted_spacings(sample(ExponentialParams{alpha, 0.0}, 10, rng));
    pooled.insert(pooled.end(), z.begin(), z.end());
  }
  const auto ks = ks_test(OrderedSample(pooled), ExponentialParams{alpha, 0.0});
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Statistics, HandValues) {
  EXPECT_DOUBLE_EQ(compute_statistic(StatisticSpec::ss(2), kHand), 0.75);
  EXPECT_DOUBLE_EQ(compute_statistic(StatisticSpec::mrs(1, 2), kHand), 2.0);
  EXPECT_DOUBLE_EQ(compute_statistic(StatisticSpec::dk(1), kHand), 1.0 / 3);
  EXPECT_DOUBLE_EQ(compute_statistic(StatisticSpec::srs(2, 2), kHand), 3.0);
  EXPECT_DOUBLE_EQ(compute_statistic(StatisticSpec::ms(2), kHand), 0.5);
  EXPECT_DOUBLE_EQ(compute_statistic(StatisticSpec::dixon(1), kHand), 2.0);
}

TEST(Statistics, Labels) {
  EXPECT_EQ(StatisticSpec::mrs(1, 10).label(), "MRS(j=1,m=10)");
  EXPECT_EQ(short_name(StatisticKind::weighted_spacings), "DK");
  EXPECT_EQ(parse_statistic_kind("srs"), StatisticKind::sum_robust_sum);
  EXPECT_EQ(parse_statistic_kind("SRS"), StatisticKind::sum_robust_sum);
  EXPECT_FALSE(parse_statistic_kind("grubbs"));
}

TEST(Statistics, SpecMismatch) {
  auto code = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::usage;
  };
  EXPECT_EQ(code([] { compute_statistic(StatisticSpec::ss(4), kHand); }), ErrorCode::spec);
  EXPECT_EQ(code([] { compute_statistic(StatisticSpec::mrs(1, 4), kHand); }), ErrorCode::spec);
  EXPECT_EQ(code([] { compute_statistic(StatisticSpec::ms(1), OrderedSample({0, 0, 0})); }),
            ErrorCode::degenerate_denominator);
  EXPECT_EQ(code([] { compute_statistic(StatisticSpec::srs(1, 1), OrderedSample({5, 0, 0})); }),
            ErrorCode::degenerate_denominator);
}

TEST(Statistics, ScaleInvariance) {
  for (std::uint64_t i = 0; i < 2000; ++i) {
    Gen g(0x5ca1e, i);
    const auto s = g.positive_sample(g.size(4, 120));
    const auto spec = g.spec(s.size());
    const double c = std::exp(g.real(-20.0, 20.0));
    const double a = compute_statistic(spec, s);
    const double b = compute_statistic(spec, s.scaled(c));
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a))) << spec.label() << " case " << i;
  }
}

TEST(Statistics, DefensiveResortAgrees) {
  Gen g(3, 0);
  const auto s = g.positive_sample(30);
  const auto spec = StatisticSpec::srs(3, 4);
  EXPECT_EQ(compute_statistic(spec, s, {.verify_order = true}), compute_statistic(spec, s));
  EXPECT_EQ(compute_statistic(spec, s.values()), compute_statistic(spec, s));
}

TEST(Statistics, InflatingTopIncreasesSumStatistics) {
  for (std::uint64_t i = 0; i < 300; ++i) {
    Gen g(0x1f1a7e, i);
    const auto s = g.positive_sample(g.size(6, 80));
    std::vector<double> v(s.values().begin(), s.values().end());
    v[0] *= g.real(1.01, 10.0);
    const OrderedSample bigger(v);
    for (const auto& spec : {StatisticSpec::ss(2), StatisticSpec::srs(2, 3), StatisticSpec::ms(1),
                             StatisticSpec::mrs(1, 3)}) {
      EXPECT_GT(compute_statistic(spec, bigger), compute_statistic(spec, s)) << spec.label();
    }
  }
}

TEST(DkLaw, HandValue) {
  EXPECT_DOUBLE_EQ(dk_normalized(1.0 / 3, 1, 4), 1.0);
  EXPECT_NEAR(dk_p_value(1.0 / 3, 1, 4), 27.0 / 64.0, 1e-12);
  EXPECT_DOUBLE_EQ(dk_p_value(0.0, 1, 4), 1.0);
}

TEST(DkLaw, PValuesUniformUnderNull) {
  RngStream rng(2024);
  std::vector<double> p;
  for (int i = 0; i < 50'000; ++i) p.push_back(dk_p_value(compute_statistic(StatisticSpec::dk(1), sample(ExponentialParams{}, 50, rng)), 1, 50));
  EXPECT_LT(testing::ks_distance(p, [](double x) { return x; }), 0.01);
}

}  // namespace
}  // namespace tailtest
