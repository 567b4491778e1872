#include "tailtest/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "tailtest/error.hpp"
#include "tailtest/parallel.hpp"
#include "tailtest/rng.hpp"

namespace tailtest {

namespace {

// n standard exponentials, descending.
void draw_null_sample(std::uint64_t seed, std::size_t index, std::vector<double>& out) {
  RngStream rng = RngStream::derive(seed, index);
  for (double& v : out) v = rng.exponential();
  std::sort(out.begin(), out.end(), std::greater<>());
}

}  // namespace

std::vector<NullTable> build_null_tables(std::span<const StatisticSpec> specs, std::size_t n, std::size_t replicates,
                                         std::uint64_t seed, unsigned threads) {
  if (replicates == 0) throw Error(ErrorCode::spec, "null table needs at least one replicate");
  for (const auto& spec : specs) validate(spec, n);

  const std::size_t count = specs.size();
  // Replicate-major so each worker writes one contiguous row.
  std::vector<double> draws(count * replicates);
  const unsigned workers = resolve_threads(threads);
  const std::size_t blocks = std::min<std::size_t>(workers, replicates);
  const std::size_t chunk = (replicates + blocks - 1) / blocks;
  parallel_for(blocks, workers, [&](std::size_t block) {
    std::vector<double> x(n);
    const std::size_t end = std::min(replicates, (block + 1) * chunk);
    for (std::size_t i = block * chunk; i < end; ++i) {
      draw_null_sample(seed, i, x);
      for (std::size_t s = 0; s < count; ++s) draws[i * count + s] = compute_statistic(specs[s], x);
    }
  });

  std::vector<NullTable> tables(count);
  for (std::size_t s = 0; s < count; ++s) {
    NullTable& t = tables[s];
    t.spec = specs[s];
    t.n = n;
    t.replicates = replicates;
    t.seed = seed;
    t.sorted_values.resize(replicates);
    for (std::size_t i = 0; i < replicates; ++i) t.sorted_values[i] = draws[i * count + s];
    std::sort(t.sorted_values.begin(), t.sorted_values.end());
  }
  return tables;
}

NullTable build_null_table(const StatisticSpec& spec, std::size_t n, std::size_t replicates, std::uint64_t seed,
                           unsigned threads) {
  return std::move(build_null_tables(std::span(&spec, 1), n, replicates, seed, threads).front());
}

double p_value(const NullTable& table, double observed) {
  const auto& v = table.sorted_values;
  if (v.empty()) throw Error(ErrorCode::spec, "p-value requested from an empty null table");
  const auto at_least = static_cast<std::size_t>(v.end() - std::lower_bound(v.begin(), v.end(), observed));
  return static_cast<double>(1 + at_least) / static_cast<double>(v.size() + 1);
}

double critical_value(const NullTable& table, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::parameter_domain, "critical value level must be in (0, 1)");
  const auto& v = table.sorted_values;
  const std::size_t reps = v.size();
  if (level * static_cast<double>(reps) < 1.0) {
    throw Error(ErrorCode::resolution, "level " + std::to_string(level) + " is below the resolution of a table with " +
                                           std::to_string(reps) + " replicates");
  }
  // p(t) <= level  <=>  #{draws >= t} <= level (R + 1) - 1.
  const auto allowed = static_cast<std::size_t>(std::floor(level * static_cast<double>(reps + 1) - 1.0));
  std::size_t k = reps - std::min(allowed, reps);
  while (k < reps) {
    const auto first = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), v[k]) - v.begin());
    if (reps - first <= allowed) return v[k];
    k = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), v[k]) - v.begin());
  }
  return std::nextafter(v.back(), std::numeric_limits<double>::infinity());
}

// --- outward calibration ----------------------------------------------------

StatisticSpec outward_spec(StatisticKind kind, std::size_t j, std::size_t m) {
  switch (kind) {
    case StatisticKind::sum_sum: return StatisticSpec::ss(j);
    case StatisticKind::sum_robust_sum: return StatisticSpec::srs(j, m);
    case StatisticKind::max_sum: return StatisticSpec::ms(j);
    case StatisticKind::max_robust_sum: return StatisticSpec::mrs(j, m);
    default: break;
  }
  throw Error(ErrorCode::spec, std::string("outward tests are defined for SS, SRS, MS and MRS, not ") +
                                   std::string(short_name(kind)));
}

double outward_min_p(std::span<const double> descending, StatisticKind kind, std::size_t r, std::size_t m,
                     std::span<const std::shared_ptr<const NullTable>> tables) {
  double best = 1.0;
  for (std::size_t j = 1; j <= r; ++j) {
    const double stat = compute_statistic(outward_spec(kind, j, m), descending);
    best = std::min(best, p_value(*tables[j - 1], stat));
  }
  return best;
}

MarginalLevelResult calibrate_outward_b(StatisticKind kind, std::size_t n, std::size_t r, std::size_t m,
                                        double target_a, TableStore& tables, const CalibrationOptions& options) {
  if (!(target_a > 0.0 && target_a < 1.0)) {
    throw Error(ErrorCode::parameter_domain, "target level must be in (0, 1)");
  }
  if (r < 1 || r > m || m >= n) throw Error(ErrorCode::spec, "outward calibration needs 1 <= r <= m < n");
  if (options.replicates == 0) throw Error(ErrorCode::spec, "calibration needs at least one replicate");

  MarginalLevelResult result;
  result.kind = kind;
  result.n = n;
  result.r = r;
  result.m = m;
  result.target_a = target_a;
  result.replicates = options.replicates;
  result.seed = options.seed;

  std::vector<StatisticSpec> specs;
  for (std::size_t j = 1; j <= r; ++j) specs.push_back(outward_spec(kind, j, m));
  tables.prefetch(specs, n);
  std::vector<std::shared_ptr<const NullTable>> rank_tables;
  for (const auto& spec : specs) rank_tables.push_back(tables.get(spec, n));

  // The procedure rejects at marginal level b iff the smallest per-rank
  // p-value is <= b, so one pass over fresh null samples serves every b.
  std::vector<double> min_p(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t i) {
    thread_local std::vector<double> x;
    x.resize(n);
    draw_null_sample(options.seed, i, x);
    min_p[i] = outward_min_p(x, kind, r, m, rank_tables);
  });
  std::sort(min_p.begin(), min_p.end());
  const auto achieved_at = [&](double b) {
    const auto hits = std::upper_bound(min_p.begin(), min_p.end(), b) - min_p.begin();
    return static_cast<double>(hits) / static_cast<double>(min_p.size());
  };

  if (r == 1) {
    result.b = target_a;
    result.achieved_a = achieved_at(target_a);
    result.trace.push_back({result.b, result.achieved_a});
    return result;
  }

  double lo = std::pow(target_a, static_cast<double>(r));
  double hi = target_a;
  double best_b = hi;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_achieved = 0.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    const double b = 0.5 * (lo + hi);
    const double achieved = achieved_at(b);
    result.trace.push_back({b, achieved});
    const double gap = std::abs(achieved - target_a);
    if (gap < best_gap) {
      best_gap = gap;
      best_b = b;
      best_achieved = achieved;
    }
    if (gap <= options.tolerance) {
      result.b = b;
      result.achieved_a = achieved;
      return result;
    }
    (achieved > target_a ? hi : lo) = b;
  }
  throw CalibrationError("outward calibration for " + std::string(short_name(kind)) + " n=" + std::to_string(n) +
                             " r=" + std::to_string(r) + " did not reach the target level within " +
                             std::to_string(options.tolerance),
                         best_b, best_achieved);
}

OutwardLevelStore::OutwardLevelStore(TableStore& tables, CalibrationOptions options)
    : tables_(tables), options_(options) {}

MarginalLevelResult OutwardLevelStore::get(StatisticKind kind, std::size_t n, std::size_t r, std::size_t m,
                                           double target_a) {
  const Key key{kind, n, r, m, target_a};
  std::promise<MarginalLevelResult> promise;
  std::shared_future<MarginalLevelResult> future;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    if (auto it = results_.find(key); it != results_.end()) {
      future = it->second;
    } else {
      future = promise.get_future().share();
      results_.emplace(key, future);
      owner = true;
    }
  }
  if (owner) {
    try {
      promise.set_value(calibrate_outward_b(kind, n, r, m, target_a, tables_, options_));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(mutex_);
      results_.erase(key);
    }
  }
  return future.get();
}

}  // namespace tailtest
