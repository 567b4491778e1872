#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "tailtest/drawdowns.hpp"
#include "tailtest/error.hpp"

namespace tailtest {
namespace {

/// A random-walk day of log returns, with occasional flat steps so ties occur.
std::vector<double> synthetic_day(std::uint64_t index) {
  testing::Gen g(0xDA7, index);
  std::vector<double> r(g.size(20, 800));
  const double vol = g.real(1e-4, 3e-3);
  for (auto& x : r) x = g.rng()() % 10 == 0 ? 0.0 : vol * g.rng().normal();
  return r;
}

TEST(Returns, HandValues) {
  EXPECT_EQ(log_returns(std::vector<double>{100, 100}), std::vector<double>{0.0});
  const auto r = log_returns(std::vector<double>{100, 98});
  EXPECT_NEAR(r[0], -0.0202027, 1e-6);
  EXPECT_THROW(log_returns(std::vector<double>{100, 0}), Error);
  EXPECT_THROW(log_returns(std::vector<double>{100}), Error);
}

TEST(Returns, SampleStandardDeviation) {
  EXPECT_DOUBLE_EQ(return_sd(std::vector<double>{1, 2, 3, 4}), std::sqrt(5.0 / 3.0));
  EXPECT_EQ(return_sd(std::vector<double>{1}), 0.0);
}

TEST(Resample, LastPriceAndCarriedFlags) {
  const std::vector<double> t{0, 10, 25, 95};
  const std::vector<double> p{1, 2, 3, 4};
  const auto s = resample_last_price("d", t, p, 30);
  EXPECT_EQ(s.timestamps, (std::vector<double>{0, 30, 60, 90}));
  EXPECT_EQ(s.prices, (std::vector<double>{1, 3, 3, 3}));
  EXPECT_EQ(s.carried, (std::vector<bool>{false, false, true, true}));
  EXPECT_THROW(resample_last_price("d", std::vector<double>{0, 0}, std::vector<double>{1, 1}, 30), Error);
  EXPECT_THROW(resample_last_price("d", t, p, 0), Error);
}

TEST(Extract, HandTrace) {
  const auto r = log_returns(std::vector<double>{100, 98, 99, 97});
  const auto out = extract_episodes(r, {0.005, 1.0});
  ASSERT_GE(out.episodes.size(), 1u);
  const auto& e = out.episodes[0];
  EXPECT_EQ(e.kind, EpisodeKind::drawdown);
  EXPECT_EQ(e.i0, 1u);
  EXPECT_EQ(e.i1, 1u);
  EXPECT_EQ(e.i2, 2u);
  EXPECT_DOUBLE_EQ(e.size, std::log(98.0 / 100.0));
  EXPECT_FALSE(e.censored);
  ASSERT_EQ(out.episodes.size(), 3u);
  EXPECT_EQ(out.episodes[1].kind, EpisodeKind::drawup);
  EXPECT_TRUE(out.episodes[2].censored);
}

TEST(Extract, MonotoneDeclineIsOneCensoredDrawdown) {
  const std::vector<double> prices{100, 99, 97, 96, 90};
  const auto out = extract_episodes(log_returns(prices), {0.0, 1.0});
  ASSERT_EQ(out.episodes.size(), 1u);
  EXPECT_TRUE(out.episodes[0].censored);
  EXPECT_NEAR(out.episodes[0].size, std::log(90.0 / 100.0), 1e-12);
}

TEST(Extract, LeadingGainsAreRemainder) {
  const auto out = extract_episodes(std::vector<double>{0.01, 0.02, -0.01}, {1.0, 0.001});
  EXPECT_DOUBLE_EQ(out.leading, 0.03);
  ASSERT_EQ(out.episodes.size(), 1u);
  EXPECT_EQ(out.episodes[0].i0, 3u);
  EXPECT_TRUE(extract_episodes(std::vector<double>{0.01, 0.0}, {1.0, 1.0}).episodes.empty());
}

TEST(Extract, Errors) {
  EXPECT_THROW(extract_episodes(std::vector<double>{}, {1.0, 1.0}), Error);
  EXPECT_THROW(extract_episodes(std::vector<double>{-1.0}, {-1.0, 1.0}), Error);
  EXPECT_THROW(extract_episodes(std::vector<double>{-1.0}, {1.0, 0.0}), Error);
}

TEST(Extract, StructuralProperties) {
  for (std::uint64_t day = 0; day < 100; ++day) {
    const auto r = synthetic_day(day);
    const double sigma = return_sd(r);
    const auto out = extract_episodes(r, {1.0, sigma});
    double total = out.leading + out.trailing;
    std::size_t expected_start = 0;
    for (std::size_t k = 0; k < out.episodes.size(); ++k) {
      const auto& e = out.episodes[k];
      total += e.size;
      EXPECT_LE(e.i0, e.i1);
      EXPECT_LE(e.i1, e.i2);
      EXPECT_EQ(e.kind, k % 2 == 0 ? EpisodeKind::drawdown : EpisodeKind::drawup);
      if (e.kind == EpisodeKind::drawdown) {
        EXPECT_LE(e.size, 0.0);
      }
      if (e.kind == EpisodeKind::drawup) {
        EXPECT_GE(e.size, 0.0);
      }
      if (k > 0) {
        EXPECT_EQ(e.i0, expected_start);
      }
      expected_start = e.i1 + 1;
      EXPECT_EQ(e.censored, k + 1 == out.episodes.size());
      const double direct = std::accumulate(r.begin() + static_cast<long>(e.i0) - 1, r.begin() + static_cast<long>(e.i1), 0.0);
      EXPECT_NEAR(direct, e.size, 1e-12);
    }
    EXPECT_NEAR(total, std::accumulate(r.begin(), r.end(), 0.0), 1e-9) << "day " << day;
  }
}

TEST(Extract, LargerEpsilonNeverAddsEpisodes) {
  for (std::uint64_t day = 0; day < 100; ++day) {
    const auto r = synthetic_day(day);
    const double sigma = return_sd(r);
    std::size_t previous = SIZE_MAX;
    for (double eps : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0}) {
      const std::size_t count = extract_episodes(r, {eps, sigma}).episodes.size();
      EXPECT_LE(count, previous) << "day " << day << " eps " << eps;
      previous = count;
    }
  }
}

TEST(Normalize, DividesByPreviousDaySigma) {
  Episode e;
  e.size = -0.02;
  e.day_id = "b";
  Episode first = e;
  first.day_id = "a";
  const std::vector<Episode> episodes{first, e};
  const std::vector<std::string> order{"a", "b"};
  std::size_t dropped = 0;
  const auto out = normalize_episodes(episodes, order, {{"a", 0.01}, {"b", 0.5}}, dropped);
  EXPECT_EQ(dropped, 1u);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].normalized_size, 2.0);
}

std::vector<PriceSeries> synthetic_days(double scale) {
  std::vector<PriceSeries> days;
  for (std::uint64_t d = 0; d < 5; ++d) {
    const auto r = synthetic_day(d);
    PriceSeries s;
    s.day_id = "day" + std::to_string(d);
    double log_p = std::log(100.0);
    s.prices.push_back(100.0);
    for (double x : r) {
      log_p += scale * x;
      s.prices.push_back(std::exp(log_p));
    }
    s.timestamps.resize(s.prices.size());
    std::iota(s.timestamps.begin(), s.timestamps.end(), 0.0);
    days.push_back(std::move(s));
  }
  return days;
}

TEST(Analyze, FirstDayDroppedAndCounted) {
  const auto days = synthetic_days(1.0);
  const auto a = analyze_drawdowns(days);
  std::size_t first_day_drawdowns = 0;
  for (const auto& e : a.days[0].extraction.episodes) first_day_drawdowns += e.kind == EpisodeKind::drawdown;
  EXPECT_EQ(a.dropped_no_previous_day, first_day_drawdowns);
  for (const auto& e : a.episodes) {
    EXPECT_NE(e.day_id, "day0");
    EXPECT_EQ(e.kind, EpisodeKind::drawdown);
    EXPECT_FALSE(e.censored);
    EXPECT_GE(e.normalized_size, 0.0);
  }
}

TEST(Analyze, VolatilityScalingLeavesNormalizedSizes) {
  const auto a = analyze_drawdowns(synthetic_days(1.0));
  const auto b = analyze_drawdowns(synthetic_days(2.0));
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    EXPECT_NEAR(a.episodes[i].normalized_size, b.episodes[i].normalized_size, 1e-9);
    EXPECT_NEAR(2.0 * a.episodes[i].size, b.episodes[i].size, 1e-9);
  }
}

TEST(Analyze, OptionsWidenSelection) {
  const auto days = synthetic_days(1.0);
  const auto plain = analyze_drawdowns(days);
  const auto wide = analyze_drawdowns(days, {.epsilon = 1.0, .include_censored = true, .include_drawups = true});
  EXPECT_GT(wide.episodes.size(), plain.episodes.size());
  EXPECT_EQ(wide.dropped_censored, 0u);
}

}  // namespace
}  // namespace tailtest
