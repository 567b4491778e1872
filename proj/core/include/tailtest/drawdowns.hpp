#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailtest {

/// Prices of one trading day sampled every `delta` seconds. Index i of
/// `prices` is the price index i of the return r_i = log(p_i / p_{i-1}).
struct PriceSeries {
  std::string day_id;
  std::vector<double> timestamps;  ///< strictly ascending
  std::vector<double> prices;      ///< > 0
  std::vector<bool> carried;       ///< grid points with no tick in their interval (empty when unknown)
  double delta = 30.0;
};

/// Last tick at or before each grid time t0, t0 + delta, ...; intervals
/// without a tick carry the previous price forward and are flagged.
PriceSeries resample_last_price(std::string day_id, std::span<const double> timestamps,
                                std::span<const double> prices, double delta);

/// r_i = log(p_i / p_{i-1}), i = 1..n-1 (stored at position i-1).
std::vector<double> log_returns(std::span<const double> prices);
std::vector<double> log_returns(const PriceSeries& series);

/// Sample standard deviation (n - 1 denominator).
double return_sd(std::span<const double> returns);

enum class EpisodeKind { drawdown, drawup };
std::string_view to_string(EpisodeKind kind) noexcept;

/// Indices are price indices (1-based over returns): the episode covers
/// returns r_{i0}..r_{i1}, and the reversal was detected at i2.
struct Episode {
  EpisodeKind kind = EpisodeKind::drawdown;
  std::size_t i0 = 0;
  std::size_t i1 = 0;
  std::size_t i2 = 0;
  double size = 0.0;  ///< cumulative log return over [i0, i1]; <= 0 for drawdowns
  double normalized_size = std::numeric_limits<double>::quiet_NaN();
  bool censored = false;  ///< the day ended before the reversal fired
  std::string day_id;
};

struct EpsilonConfig {
  double epsilon = 1.0;
  double sigma = 1.0;  ///< previous-day return SD
};

struct EpisodeExtraction {
  std::vector<Episode> episodes;
  double leading = 0.0;   ///< returns before the first negative return
  double trailing = 0.0;  ///< returns after the extremum of the final episode
};

/// Alternating drawdowns and drawups. The first drawdown starts at the
/// first negative return; an episode ends when the cumulative return moves
/// more than epsilon * sigma against it (strictly), the extremum (first
/// occurrence) closes it, and the next episode starts right after the
/// extremum. The final episode is returned with censored = true.
EpisodeExtraction extract_episodes(std::span<const double> returns, const EpsilonConfig& config);

struct DrawdownOptions {
  double epsilon = 1.0;
  bool include_censored = false;
  bool include_drawups = false;
};

struct DayEpisodes {
  std::string day_id;
  std::size_t returns = 0;
  double sigma = 0.0;           ///< this day's return SD
  double previous_sigma = 0.0;  ///< 0 when no previous day
  EpisodeExtraction extraction;
};

struct DrawdownAnalysis {
  std::vector<DayEpisodes> days;
  std::vector<Episode> episodes;  ///< normalized, filtered by options
  std::size_t dropped_no_previous_day = 0;
  std::size_t dropped_censored = 0;
  std::size_t skipped_days = 0;  ///< days whose reference sigma is zero
};

/// normalized_size = |size| / sigma_by_day[previous day]. `order` lists day
/// ids chronologically. Episodes of a day without a predecessor (or with a
/// zero predecessor sigma) are dropped and counted in `dropped`.
std::vector<Episode> normalize_episodes(std::span<const Episode> episodes, std::span<const std::string> order,
                                        const std::map<std::string, double>& sigma_by_day, std::size_t& dropped);

/// Extraction plus normalization over chronologically ordered days. Each
/// day is extracted with the previous day's sigma; the first day uses its
/// own sigma only so its (dropped) episodes can be counted.
DrawdownAnalysis analyze_drawdowns(std::span<const PriceSeries> days, const DrawdownOptions& options = {});

}  // namespace tailtest
