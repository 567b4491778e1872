#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailtest/calibration.hpp"
#include "tailtest/mixture.hpp"
#include "tailtest/ordered_sample.hpp"
#include "tailtest/procedures.hpp"
#include "tailtest/rng.hpp"
#include "tailtest/statistics.hpp"

namespace tailtest {

// --- scenarios --------------------------------------------------------------

/// Inliers are Exp(1) (Weibull(kappa, 1) for the weibull_* kinds); k of the
/// n points are replaced by outliers.
enum class ScenarioKind {
  null0,                  ///< no outliers
  single,                 ///< one Norm(mu, sigma) outlier
  clustered,              ///< k Norm(mu, sigma) outliers
  dispersed_fixed_shift,  ///< k outliers shift + Exp(mean beta)
  dispersed_max_shift,    ///< k outliers max(inliers) + Exp(mean beta)
  weibull_null,           ///< Weibull(kappa, 1), no outliers
  weibull_max_shift,      ///< Weibull(kappa, 1) inliers, k outliers max(inliers) + Exp(mean beta)
};
std::string_view to_string(ScenarioKind kind) noexcept;
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::null0;
  std::size_t n = 50;
  std::size_t k = 0;
  double mu = 0.0;
  double sigma = 0.1;
  double beta = 5.0;   ///< mean of the Exponential shift
  double shift = 3.0;  ///< fixed shift for dispersed_fixed_shift
  double kappa = 1.0;

  static ScenarioSpec null(std::size_t n) { return {ScenarioKind::null0, n, 0}; }
  static ScenarioSpec single(std::size_t n, double mu) { return {ScenarioKind::single, n, 1, mu}; }
  static ScenarioSpec clustered(std::size_t n, std::size_t k, double mu) { return {ScenarioKind::clustered, n, k, mu}; }
  static ScenarioSpec fixed_shift(std::size_t n, std::size_t k, double beta, double shift = 3.0) {
    ScenarioSpec s{ScenarioKind::dispersed_fixed_shift, n, k};
    s.beta = beta;
    s.shift = shift;
    return s;
  }
  static ScenarioSpec max_shift(std::size_t n, std::size_t k, double beta) {
    ScenarioSpec s{ScenarioKind::dispersed_max_shift, n, k};
    s.beta = beta;
    return s;
  }
  static ScenarioSpec weibull(std::size_t n, double kappa) {
    ScenarioSpec s{ScenarioKind::weibull_null, n, 0};
    s.kappa = kappa;
    return s;
  }
  static ScenarioSpec weibull_shifted(std::size_t n, std::size_t k, double kappa, double beta) {
    ScenarioSpec s{ScenarioKind::weibull_max_shift, n, k};
    s.kappa = kappa;
    s.beta = beta;
    return s;
  }

  /// Number of planted outliers implied by the kind.
  std::size_t planted() const noexcept;
  std::string label() const;
};

void validate(const ScenarioSpec& spec);

struct Scenario {
  OrderedSample sample;
  std::vector<std::size_t> planted;  ///< positions of outliers in the descending sample, ascending
};

Scenario generate_scenario(const ScenarioSpec& spec, RngStream& rng);

// --- methods ----------------------------------------------------------------

enum class MethodKind { block, inward, outward, mixture, weibull_lrt, ks_exponential };

struct Method {
  MethodKind kind = MethodKind::block;
  StatisticSpec spec;       ///< block: full spec; inward/outward: kind plus rank r and trim m
  InwardReference inward_reference = InwardReference::full_sample_rank;
  std::string label;

  static Method block(const StatisticSpec& spec);
  static Method inward(StatisticKind kind, std::size_t m);
  static Method outward(StatisticKind kind, std::size_t r, std::size_t m);
  static Method mixture();
  static Method weibull_lrt();
  static Method ks_exponential();
};

struct MethodOutcome {
  bool rejected = false;
  std::size_t k_hat = 0;
  std::vector<std::size_t> flagged;  ///< descending-sample positions declared outlying
};

/// Shared caches for a study; all are safe for concurrent use.
struct StudyContext {
  TableStore& tables;
  OutwardLevelStore& levels;
  MixtureNullStore& mixture_nulls;
  unsigned threads = 0;
};

MethodOutcome apply_method(const Method& method, const OrderedSample& sample, double level, StudyContext& context);

// --- reports ----------------------------------------------------------------

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolation quartiles (Hyndman-Fan type 7) of a nonempty set.
Quartiles quartiles(std::vector<double> values);

struct MethodSummary {
  std::string method;
  std::size_t rejections = 0;
  double rejection_rate = 0.0;
  std::optional<Quartiles> k_hat;  ///< over rejecting runs only
  std::optional<double> precision;  ///< mean over rejecting runs with a nonempty flagged set
  std::optional<double> recall;     ///< mean over runs with planted outliers
};

struct GridPoint {
  std::string label;   ///< e.g. case name or "mu=5"
  double parameter = 0.0;
  ScenarioSpec scenario;
  std::vector<MethodSummary> methods;
};

struct StudyReport {
  std::string study;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double level = 0.1;
  std::vector<GridPoint> points;
};

struct StudyPoint {
  std::string label;
  double parameter = 0.0;
  ScenarioSpec scenario;
  std::vector<Method> methods;
};

/// Replication i of grid point g draws from RngStream::derive(derive_seed(seed, g), i).
StudyReport run_study(std::string name, const std::vector<StudyPoint>& points, std::size_t replications, double level,
                      std::uint64_t seed, StudyContext& context);

/// Rejection rate per method over a grid of scenarios.
StudyReport power_study(const std::vector<Method>& methods, const std::vector<std::pair<double, ScenarioSpec>>& grid,
                        std::size_t replications, double level, std::uint64_t seed, StudyContext& context);

enum class PowerCase { single, dispersed, clustered };
std::string_view to_string(PowerCase c) noexcept;
std::optional<PowerCase> parse_power_case(std::string_view text);

struct PowerPreset {
  std::vector<Method> methods;
  std::vector<std::pair<double, ScenarioSpec>> grid;
};

/// Power-curve grids: single (n=20, one Norm(mu, 0.1) outlier, mu=3..10),
/// dispersed (n=50, five 3 + Exp(mean beta) outliers, beta=1..6) and
/// clustered (n=50, five Norm(mu, 0.1) outliers, mu=3..10). Block tests of
/// all six statistics at r = m = k, plus the mixture when k > 1.
PowerPreset power_preset(PowerCase c);

/// Block tests of each statistic kind at block sizes 1..max_block (trim m = b).
StudyReport mask_swamp_study(const std::vector<StatisticKind>& kinds, const ScenarioSpec& scenario,
                             std::size_t max_block, std::size_t replications, double level, std::uint64_t seed,
                             StudyContext& context);

struct SequentialPreset {
  std::size_t n = 50;
  std::size_t m = 10;
  std::size_t k = 5;  ///< planted count of the multi-outlier cases and SRS block size
  std::vector<std::pair<std::string, ScenarioSpec>> cases;
};

/// Case (0), (I), (II) clustered and (III) max-shifted for n in {50, 30, 15}.
SequentialPreset sequential_preset(std::size_t n);

/// MS/SS/MRS/SRS outward (r = m), MRS inward, mixture and SRS block (r = m = k).
std::vector<Method> sequential_methods(const SequentialPreset& preset);

StudyReport sequential_comparison_study(const SequentialPreset& preset, std::size_t replications, double level,
                                        std::uint64_t seed, StudyContext& context);

/// n = 30 block tests for r = 3 of all six statistics plus the Weibull LRT and
/// KS, under Weibull(kappa) with no outliers and with 3 max-shifted outliers
/// (shift mean 3). Two grid points per kappa: "null" and "outliers".
StudyReport robustness_study(const std::vector<double>& kappas, std::size_t replications, double level,
                             std::uint64_t seed, StudyContext& context);

}  // namespace tailtest
