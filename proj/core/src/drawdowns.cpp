#include "tailtest/drawdowns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tailtest/error.hpp"

namespace tailtest {

std::string_view to_string(EpisodeKind kind) noexcept {
  return kind == EpisodeKind::drawdown ? "drawdown" : "drawup";
}

PriceSeries resample_last_price(std::string day_id, std::span<const double> timestamps,
                                std::span<const double> prices, double delta) {
  if (timestamps.size() != prices.size()) throw Error(ErrorCode::input, "timestamps and prices differ in length");
  if (timestamps.empty()) throw Error(ErrorCode::input, "day " + day_id + " has no ticks");
  if (!(delta > 0.0)) throw Error(ErrorCode::parameter_domain, "sampling interval delta must be > 0");
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw Error(ErrorCode::input, "day " + day_id + ": timestamps are not strictly ascending at row " +
                                        std::to_string(i + 1));
    }
  }
  PriceSeries out;
  out.day_id = std::move(day_id);
  out.delta = delta;
  const double t0 = timestamps.front();
  const auto steps = static_cast<std::size_t>(std::floor((timestamps.back() - t0) / delta));
  std::size_t next = 0;
  double last = prices.front();
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * delta;
    bool seen = false;
    while (next < timestamps.size() && timestamps[next] <= t) {
      last = prices[next++];
      seen = true;
    }
    out.timestamps.push_back(t);
    out.prices.push_back(last);
    out.carried.push_back(!seen);
  }
  return out;
}

std::vector<double> log_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw Error(ErrorCode::degenerate_sample, "log returns need at least two prices");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      throw Error(ErrorCode::parameter_domain, "price at index " + std::to_string(i) + " is not positive");
    }
  }
  std::vector<double> r(prices.size() - 1);
  for (std::size_t i = 1; i < prices.size(); ++i) r[i - 1] = std::log(prices[i] / prices[i - 1]);
  return r;
}

std::vector<double> log_returns(const PriceSeries& series) { return log_returns(series.prices); }

double return_sd(std::span<const double> returns) {
  if (returns.size() < 2) return 0.0;
  const double mean = std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
  double ss = 0.0;
  for (double r : returns) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(returns.size() - 1));
}

EpisodeExtraction extract_episodes(std::span<const double> returns, const EpsilonConfig& config) {
  if (returns.empty()) throw Error(ErrorCode::degenerate_sample, "episode extraction needs at least one return");
  if (!(config.epsilon >= 0.0)) throw Error(ErrorCode::parameter_domain, "epsilon must be >= 0");
  if (!(config.sigma > 0.0)) throw Error(ErrorCode::parameter_domain, "sigma must be > 0");
  const double threshold = config.epsilon * config.sigma;
  const std::size_t count = returns.size();
  auto r = [&](std::size_t i) { return returns[i - 1]; };  // 1-based

  EpisodeExtraction out;
  std::size_t start = 1;
  while (start <= count && !(r(start) < 0.0)) out.leading += r(start++);
  if (start > count) return out;

  EpisodeKind kind = EpisodeKind::drawdown;
  while (start <= count) {
    const double sign = kind == EpisodeKind::drawdown ? 1.0 : -1.0;
    double cum = 0.0;
    double extreme = 0.0;
    std::size_t extreme_at = start;
    std::size_t reversal = 0;
    for (std::size_t i = start; i <= count; ++i) {
      cum += r(i);
      // Drawdowns track the running minimum; drawups mirror with sign = -1.
      if (i == start || sign * cum < sign * extreme) {
        extreme = cum;
        extreme_at = i;
      } else if (sign * (cum - extreme) > threshold) {
        reversal = i;
        break;
      }
    }
    Episode e;
    e.kind = kind;
    e.i0 = start;
    e.i1 = extreme_at;
    e.i2 = reversal == 0 ? count : reversal;
    e.size = extreme;
    e.censored = reversal == 0;
    out.episodes.push_back(e);
    if (e.censored) {
      for (std::size_t i = extreme_at + 1; i <= count; ++i) out.trailing += r(i);
      break;
    }
    start = extreme_at + 1;
    kind = kind == EpisodeKind::drawdown ? EpisodeKind::drawup : EpisodeKind::drawdown;
  }
  return out;
}

std::vector<Episode> normalize_episodes(std::span<const Episode> episodes, std::span<const std::string> order,
                                        const std::map<std::string, double>& sigma_by_day, std::size_t& dropped) {
  std::map<std::string, std::string> previous;
  for (std::size_t i = 1; i < order.size(); ++i) previous[order[i]] = order[i - 1];
  std::vector<Episode> out;
  dropped = 0;
  for (const auto& e : episodes) {
    const auto prev = previous.find(e.day_id);
    const auto sigma = prev == previous.end() ? sigma_by_day.end() : sigma_by_day.find(prev->second);
    if (sigma == sigma_by_day.end() || !(sigma->second > 0.0)) {
      ++dropped;
      continue;
    }
    Episode normalized = e;
    normalized.normalized_size = std::abs(e.size) / sigma->second;
    out.push_back(normalized);
  }
  return out;
}

DrawdownAnalysis analyze_drawdowns(std::span<const PriceSeries> days, const DrawdownOptions& options) {
  if (!(options.epsilon >= 0.0)) throw Error(ErrorCode::parameter_domain, "epsilon must be >= 0");
  DrawdownAnalysis analysis;
  double previous_sigma = 0.0;
  for (std::size_t d = 0; d < days.size(); ++d) {
    DayEpisodes day;
    day.day_id = days[d].day_id;
    const auto returns = log_returns(days[d]);
    day.returns = returns.size();
    day.sigma = return_sd(returns);
    day.previous_sigma = d == 0 ? 0.0 : previous_sigma;
    previous_sigma = day.sigma;

    const double extraction_sigma = d == 0 ? day.sigma : day.previous_sigma;
    if (!(extraction_sigma > 0.0)) {
      // A flat reference day gives no scale; the whole day is skipped.
      ++analysis.skipped_days;
      analysis.days.push_back(std::move(day));
      continue;
    }
    day.extraction = extract_episodes(returns, EpsilonConfig{options.epsilon, extraction_sigma});
    for (auto& e : day.extraction.episodes) e.day_id = day.day_id;

    for (const auto& e : day.extraction.episodes) {
      if (e.kind == EpisodeKind::drawup && !options.include_drawups) continue;
      if (d == 0) {
        ++analysis.dropped_no_previous_day;
        continue;
      }
      if (e.censored && !options.include_censored) {
        ++analysis.dropped_censored;
        continue;
      }
      Episode normalized = e;
      normalized.normalized_size = std::abs(e.size) / day.previous_sigma;
      analysis.episodes.push_back(normalized);
    }
    analysis.days.push_back(std::move(day));
  }
  return analysis;
}

}  // namespace tailtest
