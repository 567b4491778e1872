#include "tailtest/studies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tailtest/distributions.hpp"
#include "tailtest/error.hpp"
#include "tailtest/parallel.hpp"

namespace tailtest {

Method Method::block(const StatisticSpec& spec) { return {MethodKind::block, spec, {}, spec.label()}; }

Method Method::inward(StatisticKind kind, std::size_t m) {
  return {MethodKind::inward, StatisticSpec{kind, 1, m}, {}, std::string(short_name(kind)) + " In"};
}

Method Method::outward(StatisticKind kind, std::size_t r, std::size_t m) {
  return {MethodKind::outward, StatisticSpec{kind, r, m}, {}, std::string(short_name(kind)) + " Out"};
}

Method Method::mixture() { return {MethodKind::mixture, {}, {}, "Mix"}; }
Method Method::weibull_lrt() { return {MethodKind::weibull_lrt, {}, {}, "Weibull LRT"}; }
Method Method::ks_exponential() { return {MethodKind::ks_exponential, {}, {}, "KS"}; }

namespace {

std::vector<std::size_t> leading(std::size_t count) {
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = i;
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

MethodOutcome apply_method(const Method& method, const OrderedSample& sample, double level, StudyContext& context) {
  MethodOutcome out;
  switch (method.kind) {
    case MethodKind::block: {
      const BlockResult r = block_test(sample, method.spec, level, context.tables);
      out.rejected = r.rejected;
      if (out.rejected) out.k_hat = method.spec.rank;
      break;
    }
    case MethodKind::inward: {
      InwardOptions options;
      options.reference = method.inward_reference;
      const SequentialResult r = inward_test(sample, method.spec.kind, method.spec.trim, level, context.tables, options);
      out.k_hat = r.k_hat;
      out.rejected = r.k_hat > 0;
      break;
    }
    case MethodKind::outward: {
      const SequentialResult r =
          outward_test(sample, method.spec.kind, method.spec.rank, method.spec.trim, level, context.levels);
      out.k_hat = r.k_hat;
      out.rejected = r.k_hat > 0;
      break;
    }
    case MethodKind::mixture: {
      const MixtureFit fit = fit_mixture(sample, context.mixture_nulls.options().em);
      const MixtureLrtResult lrt = mixture_lrt(sample, fit, context.mixture_nulls);
      out.rejected = lrt.p_value <= level;
      if (out.rejected) {
        out.k_hat = weight_count(fit);
        out.flagged = classify_outliers(fit);
      }
      return out;
    }
    case MethodKind::weibull_lrt:
      out.rejected = weibull_vs_exponential_lrt(sample).p_value <= level;
      return out;
    case MethodKind::ks_exponential:
      out.rejected = ks_exponential_fitted(sample).p_value <= level;
      return out;
  }
  out.flagged = leading(out.k_hat);
  return out;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::degenerate_sample, "quartiles of an empty set");
  std::sort(values.begin(), values.end());
  const auto at = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

StudyReport run_study(std::string name, const std::vector<StudyPoint>& points, std::size_t replications, double level,
                      std::uint64_t seed, StudyContext& context) {
  if (replications == 0) throw Error(ErrorCode::spec, "study needs at least one replication");
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::parameter_domain, "level must be in (0, 1)");
  StudyReport report;
  report.study = std::move(name);
  report.replications = replications;
  report.seed = seed;
  report.level = level;

  struct Cell {
    bool rejected = false;
    std::size_t k_hat = 0;
    std::size_t flagged = 0;
    std::size_t hits = 0;
  };

  for (std::size_t g = 0; g < points.size(); ++g) {
    const StudyPoint& point = points[g];
    validate(point.scenario);
    const std::size_t methods = point.methods.size();
    const std::size_t planted_count = point.scenario.planted();
    const std::uint64_t point_seed = derive_seed(seed, g);
    std::vector<Cell> cells(replications * methods);

    parallel_for(replications, context.threads, [&](std::size_t i) {
      RngStream rng = RngStream::derive(point_seed, i);
      const Scenario scenario = generate_scenario(point.scenario, rng);
      for (std::size_t k = 0; k < methods; ++k) {
        const MethodOutcome outcome = apply_method(point.methods[k], scenario.sample, level, context);
        Cell& cell = cells[i * methods + k];
        cell.rejected = outcome.rejected;
        cell.k_hat = outcome.k_hat;
        cell.flagged = outcome.flagged.size();
        for (std::size_t f : outcome.flagged) {
          cell.hits += std::binary_search(scenario.planted.begin(), scenario.planted.end(), f) ? 1 : 0;
        }
      }
    });

    GridPoint grid;
    grid.label = point.label;
    grid.parameter = point.parameter;
    grid.scenario = point.scenario;
    for (std::size_t k = 0; k < methods; ++k) {
      MethodSummary summary;
      summary.method = point.methods[k].label;
      std::vector<double> k_hats;
      double precision_sum = 0.0, recall_sum = 0.0;
      std::size_t precision_runs = 0;
      for (std::size_t i = 0; i < replications; ++i) {
        const Cell& cell = cells[i * methods + k];
        if (cell.rejected) {
          ++summary.rejections;
          k_hats.push_back(static_cast<double>(cell.k_hat));
          if (planted_count > 0 && cell.flagged > 0) {
            precision_sum += static_cast<double>(cell.hits) / static_cast<double>(cell.flagged);
            ++precision_runs;
          }
        }
        if (planted_count > 0) recall_sum += static_cast<double>(cell.hits) / static_cast<double>(planted_count);
      }
      summary.rejection_rate = static_cast<double>(summary.rejections) / static_cast<double>(replications);
      if (!k_hats.empty()) summary.k_hat = quartiles(std::move(k_hats));
      if (precision_runs > 0) summary.precision = precision_sum / static_cast<double>(precision_runs);
      if (planted_count > 0) summary.recall = recall_sum / static_cast<double>(replications);
      grid.methods.push_back(std::move(summary));
    }
    report.points.push_back(std::move(grid));
  }
  return report;
}

StudyReport power_study(const std::vector<Method>& methods, const std::vector<std::pair<double, ScenarioSpec>>& grid,
                        std::size_t replications, double level, std::uint64_t seed, StudyContext& context) {
  if (grid.empty()) throw Error(ErrorCode::spec, "power study needs a nonempty grid");
  std::vector<StudyPoint> points;
  for (const auto& [parameter, scenario] : grid) {
    points.push_back({format_number(parameter), parameter, scenario, methods});
  }
  return run_study("power", points, replications, level, seed, context);
}

std::string_view to_string(PowerCase c) noexcept {
  switch (c) {
    case PowerCase::single: return "single";
    case PowerCase::dispersed: return "dispersed";
    case PowerCase::clustered: return "clustered";
  }
  return "?";
}

std::optional<PowerCase> parse_power_case(std::string_view text) {
  for (auto c : {PowerCase::single, PowerCase::dispersed, PowerCase::clustered}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

PowerPreset power_preset(PowerCase c) {
  PowerPreset preset;
  const std::size_t k = c == PowerCase::single ? 1 : 5;
  for (const StatisticSpec& spec : {StatisticSpec::ss(k), StatisticSpec::srs(k, k), StatisticSpec::ms(k),
                                    StatisticSpec::mrs(k, k), StatisticSpec::dixon(k), StatisticSpec::dk(k)}) {
    Method m = Method::block(spec);
    m.label = std::string(short_name(spec.kind));
    preset.methods.push_back(m);
  }
  if (k > 1) preset.methods.push_back(Method::mixture());
  switch (c) {
    case PowerCase::single:
      for (int mu = 3; mu <= 10; ++mu) preset.grid.emplace_back(mu, ScenarioSpec::single(20, mu));
      break;
    case PowerCase::dispersed:
      for (int beta = 1; beta <= 6; ++beta) preset.grid.emplace_back(beta, ScenarioSpec::fixed_shift(50, 5, beta));
      break;
    case PowerCase::clustered:
      for (int mu = 3; mu <= 10; ++mu) preset.grid.emplace_back(mu, ScenarioSpec::clustered(50, 5, mu));
      break;
  }
  return preset;
}

StudyReport mask_swamp_study(const std::vector<StatisticKind>& kinds, const ScenarioSpec& scenario,
                             std::size_t max_block, std::size_t replications, double level, std::uint64_t seed,
                             StudyContext& context) {
  if (max_block < 1 || max_block >= scenario.n - 1) {
    throw Error(ErrorCode::spec, "block sizes must satisfy 1 <= b < n - 1");
  }
  // One pass with every (kind, b) so all block sizes see the same samples.
  StudyPoint all{"all", 0.0, scenario, {}};
  for (std::size_t b = 1; b <= max_block; ++b) {
    for (StatisticKind kind : kinds) {
      const bool trim = kind == StatisticKind::sum_robust_sum || kind == StatisticKind::max_robust_sum;
      all.methods.push_back(Method::block(StatisticSpec{kind, b, trim ? b : 0}));
    }
  }
  StudyReport joint = run_study("mask_swamp", {all}, replications, level, seed, context);
  StudyReport report = joint;
  report.points.clear();
  for (std::size_t b = 1; b <= max_block; ++b) {
    GridPoint point;
    point.label = "b=" + std::to_string(b);
    point.parameter = static_cast<double>(b);
    point.scenario = scenario;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      MethodSummary summary = joint.points.front().methods[(b - 1) * kinds.size() + k];
      summary.method = std::string(short_name(kinds[k]));
      point.methods.push_back(std::move(summary));
    }
    report.points.push_back(std::move(point));
  }
  return report;
}

SequentialPreset sequential_preset(std::size_t n) {
  SequentialPreset p;
  p.n = n;
  switch (n) {
    case 50:
      p.m = 10;
      p.k = 5;
      p.cases = {{"(0)", ScenarioSpec::null(50)},
                 {"(I)", ScenarioSpec::single(50, 7.0)},
                 {"(II)", ScenarioSpec::clustered(50, 5, 5.0)},
                 {"(III)", ScenarioSpec::max_shift(50, 5, 5.0)}};
      break;
    case 30:
      p.m = 5;
      p.k = 3;
      p.cases = {{"(0)", ScenarioSpec::null(30)},
                 {"(I)", ScenarioSpec::single(30, 7.0)},
                 {"(II)", ScenarioSpec::clustered(30, 3, 5.0)},
                 {"(III)", ScenarioSpec::max_shift(30, 3, 5.0)}};
      break;
    case 15:
      p.m = 5;
      p.k = 3;
      p.cases = {{"(0)", ScenarioSpec::null(15)},
                 {"(I)", ScenarioSpec::single(15, 4.0)},
                 {"(II)", ScenarioSpec::clustered(15, 3, 4.0)},
                 {"(III)", ScenarioSpec::max_shift(15, 3, 5.0)}};
      break;
    default:
      throw Error(ErrorCode::spec, "sequential presets exist for n = 50, 30 and 15");
  }
  return p;
}

std::vector<Method> sequential_methods(const SequentialPreset& preset) {
  Method block = Method::block(StatisticSpec::srs(preset.k, preset.k));
  block.label = "SRS Block";
  return {Method::outward(StatisticKind::max_sum, preset.m, preset.m),
          Method::outward(StatisticKind::sum_sum, preset.m, preset.m),
          Method::outward(StatisticKind::max_robust_sum, preset.m, preset.m),
          Method::outward(StatisticKind::sum_robust_sum, preset.m, preset.m),
          Method::inward(StatisticKind::max_robust_sum, preset.m),
          Method::mixture(),
          block};
}

StudyReport sequential_comparison_study(const SequentialPreset& preset, std::size_t replications, double level,
                                        std::uint64_t seed, StudyContext& context) {
  const auto methods = sequential_methods(preset);
  std::vector<StudyPoint> points;
  for (std::size_t c = 0; c < preset.cases.size(); ++c) {
    points.push_back({preset.cases[c].first, static_cast<double>(c), preset.cases[c].second, methods});
  }
  return run_study("sequential_n" + std::to_string(preset.n), points, replications, level, seed, context);
}

StudyReport robustness_study(const std::vector<double>& kappas, std::size_t replications, double level,
                             std::uint64_t seed, StudyContext& context) {
  if (kappas.empty()) throw Error(ErrorCode::spec, "robustness study needs a nonempty kappa grid");
  constexpr std::size_t n = 30;
  constexpr std::size_t r = 3;
  std::vector<Method> methods;
  for (const StatisticSpec& spec : {StatisticSpec::ss(r), StatisticSpec::srs(r, r), StatisticSpec::ms(r),
                                    StatisticSpec::mrs(r, r), StatisticSpec::dixon(r), StatisticSpec::dk(r)}) {
    Method m = Method::block(spec);
    m.label = std::string(short_name(spec.kind));
    methods.push_back(m);
  }
  methods.push_back(Method::weibull_lrt());
  methods.push_back(Method::ks_exponential());

  std::vector<StudyPoint> points;
  for (double kappa : kappas) {
    points.push_back({"null kappa=" + format_number(kappa), kappa, ScenarioSpec::weibull(n, kappa), methods});
    points.push_back(
        {"outliers kappa=" + format_number(kappa), kappa, ScenarioSpec::weibull_shifted(n, r, kappa, 3.0), methods});
  }
  return run_study("robustness", points, replications, level, seed, context);
}

}  // namespace tailtest
