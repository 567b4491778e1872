#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "tailtest/calibration.hpp"
#include "tailtest/ordered_sample.hpp"
#include "tailtest/statistics.hpp"

namespace tailtest {

struct BlockResult {
  StatisticSpec spec;
  double statistic = 0.0;
  double p_value = 1.0;
  bool rejected = false;
  double level = 0.1;
};

/// One-shot test of the r suspected outliers named by spec. DK uses its
/// closed-form F tail, every other kind a null table. Ties at
/// p == level reject.
BlockResult block_test(const OrderedSample& sample, const StatisticSpec& spec, double level, TableStore& tables);

enum class Direction { inward, outward };
std::string_view to_string(Direction direction) noexcept;

struct SequentialStep {
  std::size_t rank = 0;         ///< rank t (inward) or j (outward) in the full sample
  std::size_t sample_size = 0;  ///< size of the sample the statistic is read from
  std::size_t table_n = 0;      ///< sample size of the reference null table
  StatisticSpec table_spec;     ///< spec of the reference null table
  double statistic = 0.0;
  double p_value = 1.0;
  bool rejected = false;
};

struct SequentialResult {
  Direction direction = Direction::inward;
  std::size_t k_hat = 0;
  std::vector<SequentialStep> steps;
  double marginal_level = 0.1;  ///< b
  double overall_level = 0.1;   ///< a
};

/// Null reference used at inward step t, where x_(t) is the point under test.
enum class InwardReference {
  /// x_(t) / sum_{i>m} x_(i) (or x_(t) / sum_{i>=t} x_(i) for MS) read off the
  /// full sample and referred to the rank-t table for size n. Only MS and MRS
  /// families (SS and SRS reduce to them at rank 1).
  full_sample_rank,
  /// Rank-1 statistic of the reduced sample x_(t..n) with trim m - t + 1,
  /// so the robust denominator stays the original bottom n - m points;
  /// referred to the rank-1 table for size n - t + 1.
  reduced_fixed_denominator,
  /// As above but the trim stays m on every reduced sample.
  reduced_fixed_trim,
};
std::string_view to_string(InwardReference reference) noexcept;
std::optional<InwardReference> parse_inward_reference(std::string_view text);

struct InwardOptions {
  InwardReference reference = InwardReference::full_sample_rank;
};

/// Tests x_(1), x_(2), ... in turn at level `level` until the first
/// non-rejection or m steps. `family` supplies the statistic kind; its
/// rank is ignored. k_hat is the number of rejected steps.
SequentialResult inward_test(const OrderedSample& sample, StatisticKind family, std::size_t m, double level,
                             TableStore& tables, const InwardOptions& options = {});

struct OutwardOptions {
  /// Use this marginal level instead of calibrating one.
  std::optional<double> marginal_level;
};

/// Tests ranks r, r-1, ..., 1 at the calibrated marginal level b and stops
/// at the first rejection; k_hat is that rank, or 0.
SequentialResult outward_test(const OrderedSample& sample, StatisticKind family, std::size_t r, std::size_t m,
                              double overall_level, OutwardLevelStore& levels, const OutwardOptions& options = {});

// --- tail sweep -------------------------------------------------------------

/// How a top-n' subsample is mapped to the Exponential domain before testing.
enum class TailModel {
  none,         ///< values are already Exponential-domain excesses
  exponential,  ///< x - u
  pareto,       ///< log(x / u)
};
std::string_view to_string(TailModel model) noexcept;
std::optional<TailModel> parse_tail_model(std::string_view text);

enum class ProcedureKind { block, inward, outward };
std::string_view to_string(ProcedureKind kind) noexcept;
std::optional<ProcedureKind> parse_procedure_kind(std::string_view text);

struct ProcedureConfig {
  ProcedureKind procedure = ProcedureKind::inward;
  StatisticKind statistic = StatisticKind::max_robust_sum;
  std::size_t r = 1;   ///< block rank, outward r
  std::size_t m = 10;  ///< inward steps and trim
  double level = 0.1;
  InwardReference inward_reference = InwardReference::full_sample_rank;
  TailModel tail_model = TailModel::none;
};

struct SweepPoint {
  std::size_t n_tail = 0;
  double threshold = 0.0;  ///< u used by the tail transform (0 for none)
  std::size_t m_used = 0;  ///< m after clamping to the subsample
  std::size_t k_hat = 0;
  double p_first_step = 1.0;
  bool rejected = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;  ///< ordered by n_tail ascending
  std::size_t run_rule_c = 0;
  std::size_t longest_run = 0;
  bool verdict = false;
};

/// Threshold for the top-n' subsample: x_(n'+1) when it exists, otherwise
/// the smallest value of the subsample.
double sweep_threshold(const OrderedSample& sample, std::size_t n_tail);

/// Top-n' subsample mapped through the tail model.
OrderedSample tail_subsample(const OrderedSample& sample, std::size_t n_tail, TailModel model);

/// Runs the configured procedure on every top-n' subsample, n_min <= n' <=
/// n_max. c = ceil(n_max / 10); the verdict is a run of >= c consecutive
/// rejecting sizes. Inward m and outward r, m are clamped to n' - 2 when
/// the subsample is too small for them.
SweepResult tail_sweep(const OrderedSample& sample, std::size_t n_min, std::size_t n_max, const ProcedureConfig& config,
                       OutwardLevelStore& levels);

/// Length of the longest run of consecutive true values.
std::size_t longest_run(const std::vector<bool>& flags);

}  // namespace tailtest
