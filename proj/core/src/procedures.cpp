#include "tailtest/procedures.hpp"

#include <algorithm>
#include <cmath>

#include "tailtest/distributions.hpp"
#include "tailtest/error.hpp"
#include "tailtest/parallel.hpp"

namespace tailtest {

std::string_view to_string(Direction direction) noexcept {
  return direction == Direction::inward ? "inward" : "outward";
}

std::string_view to_string(InwardReference reference) noexcept {
  switch (reference) {
    case InwardReference::full_sample_rank: return "full_sample_rank";
    case InwardReference::reduced_fixed_denominator: return "reduced_fixed_denominator";
    case InwardReference::reduced_fixed_trim: return "reduced_fixed_trim";
  }
  return "?";
}

std::optional<InwardReference> parse_inward_reference(std::string_view text) {
  for (auto r : {InwardReference::full_sample_rank, InwardReference::reduced_fixed_denominator,
                 InwardReference::reduced_fixed_trim}) {
    if (text == to_string(r)) return r;
  }
  return std::nullopt;
}

std::string_view to_string(TailModel model) noexcept {
  switch (model) {
    case TailModel::none: return "none";
    case TailModel::exponential: return "exponential";
    case TailModel::pareto: return "pareto";
  }
  return "?";
}

std::optional<TailModel> parse_tail_model(std::string_view text) {
  for (auto m : {TailModel::none, TailModel::exponential, TailModel::pareto}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

std::string_view to_string(ProcedureKind kind) noexcept {
  switch (kind) {
    case ProcedureKind::block: return "block";
    case ProcedureKind::inward: return "inward";
    case ProcedureKind::outward: return "outward";
  }
  return "?";
}

std::optional<ProcedureKind> parse_procedure_kind(std::string_view text) {
  for (auto k : {ProcedureKind::block, ProcedureKind::inward, ProcedureKind::outward}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::parameter_domain, "level must be in (0, 1)");
}

bool uses_trim(StatisticKind kind) {
  return kind == StatisticKind::sum_robust_sum || kind == StatisticKind::max_robust_sum;
}

}  // namespace

BlockResult block_test(const OrderedSample& sample, const StatisticSpec& spec, double level, TableStore& tables) {
  check_level(level);
  validate(spec, sample.size());
  BlockResult result;
  result.spec = spec;
  result.level = level;
  result.statistic = compute_statistic(spec, sample);
  result.p_value = spec.kind == StatisticKind::weighted_spacings
                       ? dk_p_value(result.statistic, spec.rank, sample.size())
                       : p_value(*tables.get(spec, sample.size()), result.statistic);
  result.rejected = result.p_value <= level;
  return result;
}

// --- inward -----------------------------------------------------------------

SequentialResult inward_test(const OrderedSample& sample, StatisticKind family, std::size_t m, double level,
                             TableStore& tables, const InwardOptions& options) {
  check_level(level);
  const std::size_t n = sample.size();
  if (m < 1) throw Error(ErrorCode::spec, "inward test needs m >= 1");
  if (m >= n || n - m < 2) {
    throw Error(ErrorCode::insufficient_sample, "inward test needs n - m >= 2 (n=" + std::to_string(n) +
                                                    ", m=" + std::to_string(m) + ")");
  }

  SequentialResult result;
  result.direction = Direction::inward;
  result.marginal_level = level;
  result.overall_level = level;

  if (options.reference == InwardReference::full_sample_rank) {
    StatisticKind kind = family;
    if (kind == StatisticKind::sum_sum) kind = StatisticKind::max_sum;
    if (kind == StatisticKind::sum_robust_sum) kind = StatisticKind::max_robust_sum;
    if (kind != StatisticKind::max_sum && kind != StatisticKind::max_robust_sum) {
      throw Error(ErrorCode::spec, std::string("full-sample-rank inward reference supports MS and MRS, not ") +
                                       std::string(short_name(family)));
    }
    std::vector<StatisticSpec> specs;
    for (std::size_t t = 1; t <= m; ++t) {
      specs.push_back(kind == StatisticKind::max_sum ? StatisticSpec::ms(t) : StatisticSpec::mrs(t, m));
    }
    tables.prefetch(specs, n);
    for (std::size_t t = 1; t <= m; ++t) {
      SequentialStep step;
      step.rank = t;
      step.sample_size = n - t + 1;
      step.table_n = n;
      step.table_spec = specs[t - 1];
      step.statistic = compute_statistic(step.table_spec, sample.values());
      step.p_value = p_value(*tables.get(step.table_spec, n), step.statistic);
      step.rejected = step.p_value <= level;
      result.steps.push_back(step);
      if (!step.rejected) break;
      ++result.k_hat;
    }
    return result;
  }

  for (std::size_t t = 1; t <= m; ++t) {
    const std::size_t size = n - t + 1;
    std::size_t trim = 0;
    if (uses_trim(family)) {
      trim = options.reference == InwardReference::reduced_fixed_denominator ? m - t + 1 : m;
    }
    const StatisticSpec spec{family, 1, trim};
    if (trim >= size) {
      throw Error(ErrorCode::insufficient_sample, "inward step " + std::to_string(t) + " leaves " +
                                                      std::to_string(size) + " points for trim " + std::to_string(trim));
    }
    SequentialStep step;
    step.rank = t;
    step.sample_size = size;
    step.table_n = size;
    step.table_spec = spec;
    step.statistic = compute_statistic(spec, sample.values().subspan(t - 1));
    step.p_value = p_value(*tables.get(spec, size), step.statistic);
    step.rejected = step.p_value <= level;
    result.steps.push_back(step);
    if (!step.rejected) break;
    ++result.k_hat;
  }
  return result;
}

// --- outward ----------------------------------------------------------------

SequentialResult outward_test(const OrderedSample& sample, StatisticKind family, std::size_t r, std::size_t m,
                              double overall_level, OutwardLevelStore& levels, const OutwardOptions& options) {
  check_level(overall_level);
  const std::size_t n = sample.size();
  if (r < 1 || r > m || m >= n) throw Error(ErrorCode::spec, "outward test needs 1 <= r <= m < n");

  SequentialResult result;
  result.direction = Direction::outward;
  result.overall_level = overall_level;
  if (options.marginal_level) {
    check_level(*options.marginal_level);
    result.marginal_level = *options.marginal_level;
  } else {
    result.marginal_level = levels.get(family, n, r, m, overall_level).b;
  }

  std::vector<StatisticSpec> specs;
  for (std::size_t j = 1; j <= r; ++j) specs.push_back(outward_spec(family, j, m));
  TableStore& tables = levels.tables();
  tables.prefetch(specs, n);
  for (std::size_t j = r; j >= 1; --j) {
    SequentialStep step;
    step.rank = j;
    step.sample_size = n;
    step.table_n = n;
    step.table_spec = specs[j - 1];
    step.statistic = compute_statistic(step.table_spec, sample.values());
    step.p_value = p_value(*tables.get(step.table_spec, n), step.statistic);
    step.rejected = step.p_value <= result.marginal_level;
    result.steps.push_back(step);
    if (step.rejected) {
      result.k_hat = j;
      break;
    }
  }
  return result;
}

// --- tail sweep -------------------------------------------------------------

double sweep_threshold(const OrderedSample& sample, std::size_t n_tail) {
  if (n_tail < 1 || n_tail > sample.size()) throw Error(ErrorCode::spec, "tail size must be in [1, n]");
  return n_tail < sample.size() ? sample[n_tail] : sample[n_tail - 1];
}

OrderedSample tail_subsample(const OrderedSample& sample, std::size_t n_tail, TailModel model) {
  OrderedSample top = sample.top(n_tail);
  if (model == TailModel::none) return top;
  const double u = sweep_threshold(sample, n_tail);
  if (model == TailModel::exponential) return top.shifted(u);
  if (!(u > 0.0)) throw Error(ErrorCode::parameter_domain, "pareto tail transform needs a positive threshold");
  return pareto_to_exp(top, u);
}

std::size_t longest_run(const std::vector<bool>& flags) {
  std::size_t best = 0, current = 0;
  for (bool f : flags) {
    current = f ? current + 1 : 0;
    best = std::max(best, current);
  }
  return best;
}

SweepResult tail_sweep(const OrderedSample& sample, std::size_t n_min, std::size_t n_max,
                       const ProcedureConfig& config, OutwardLevelStore& levels) {
  check_level(config.level);
  if (n_min < 3 || n_min >= n_max || n_max > sample.size()) {
    throw Error(ErrorCode::spec, "tail sweep needs 3 <= n_min < n_max <= n");
  }
  SweepResult result;
  result.run_rule_c = (n_max + 9) / 10;
  result.points.resize(n_max - n_min + 1);

  parallel_for(result.points.size(), levels.tables().options().threads, [&](std::size_t i) {
    SweepPoint& point = result.points[i];
    point.n_tail = n_min + i;
    point.threshold = config.tail_model == TailModel::none ? 0.0 : sweep_threshold(sample, point.n_tail);
    const OrderedSample sub = tail_subsample(sample, point.n_tail, config.tail_model);
    const std::size_t cap = point.n_tail - 2;
    point.m_used = std::min(config.m, cap);
    switch (config.procedure) {
      case ProcedureKind::block: {
        const std::size_t r = std::min(config.r, cap);
        const StatisticSpec spec{config.statistic, r, uses_trim(config.statistic) ? std::max(point.m_used, r) : 0};
        const BlockResult block = block_test(sub, spec, config.level, levels.tables());
        point.rejected = block.rejected;
        point.k_hat = block.rejected ? r : 0;
        point.p_first_step = block.p_value;
        break;
      }
      case ProcedureKind::inward: {
        InwardOptions options;
        options.reference = config.inward_reference;
        const SequentialResult seq =
            inward_test(sub, config.statistic, point.m_used, config.level, levels.tables(), options);
        point.k_hat = seq.k_hat;
        point.rejected = seq.k_hat > 0;
        point.p_first_step = seq.steps.front().p_value;
        break;
      }
      case ProcedureKind::outward: {
        const std::size_t r = std::min(config.r, point.m_used);
        const SequentialResult seq = outward_test(sub, config.statistic, r, point.m_used, config.level, levels);
        point.k_hat = seq.k_hat;
        point.rejected = seq.k_hat > 0;
        point.p_first_step = seq.steps.front().p_value;
        break;
      }
    }
  });

  std::vector<bool> flags;
  for (const auto& p : result.points) flags.push_back(p.rejected);
  result.longest_run = longest_run(flags);
  result.verdict = result.longest_run >= result.run_rule_c;
  return result;
}

}  // namespace tailtest
