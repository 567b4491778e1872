#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tailtest/procedures.hpp"
#include "tailtest/statistics.hpp"

namespace tailtest::cli {

inline constexpr std::string_view kToolName = "tailtest";
inline constexpr std::string_view kToolVersion = "0.3.0";
inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kCacheEnvVar = "TAILTEST_CACHE_DIR";

enum class Command { calibrate, test, inward, outward, sweep, mixture, drawdowns, simulate, ccdf, layers, rerun };
std::string_view to_string(Command command) noexcept;
std::optional<Command> parse_command(std::string_view text);

/// Map applied to the ingested column after the optional threshold filter.
enum class Transform {
  none,
  log,     ///< log(x / u), or log(x) without a threshold
  excess,  ///< x - u
};
std::string_view to_string(Transform transform) noexcept;
std::optional<Transform> parse_transform(std::string_view text);

enum class OutputFormat { json, csv };
std::string_view to_string(OutputFormat format) noexcept;

enum class Study { sequential, power, mask_swamp, robustness };
std::string_view to_string(Study study) noexcept;
std::optional<Study> parse_study(std::string_view text);

/// Everything a command needs. Fields irrelevant to the command keep their
/// defaults and are still echoed, so a report alone can replay the run.
struct RunConfig {
  Command command = Command::ccdf;
  std::vector<std::string> inputs;

  // ingestion
  std::optional<std::string> column;  ///< 1-based index or header name
  std::optional<double> threshold;    ///< --u
  Transform transform = Transform::none;

  // tests
  StatisticKind statistic = StatisticKind::max_robust_sum;
  std::size_t r = 1;
  std::optional<std::size_t> m;  ///< resolved per command by effective_m
  std::size_t n = 0;             ///< calibrate only
  double level = 0.1;
  std::optional<double> marginal_level;
  InwardReference inward_reference = InwardReference::full_sample_rank;

  // sweep
  ProcedureKind procedure = ProcedureKind::inward;
  TailModel tail_model = TailModel::pareto;
  std::size_t n_min = 10;
  std::optional<std::size_t> n_max;

  // drawdowns
  double epsilon = 1.0;
  double delta = 30.0;
  bool include_drawups = false;
  bool include_censored = false;

  // studies
  Study study = Study::sequential;
  std::size_t study_n = 50;
  std::string power_case = "clustered";
  std::vector<double> kappas{0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
  std::string scenario = "clustered";
  std::size_t scenario_k = 5;
  double scenario_mu = 8.0;
  double scenario_beta = 5.0;
  std::size_t max_block = 10;
  std::size_t replications = 1000;

  // layers
  std::vector<double> breakpoints;

  // randomness, tables, caching
  std::uint64_t seed = 0;
  bool seed_from_entropy = false;
  std::size_t table_replicates = 50'000;
  std::uint64_t table_seed = 0;
  std::size_t calibration_replicates = 10'000;
  std::uint64_t calibration_seed = 0;
  double tolerance = 0.005;
  std::size_t mixture_replicates = 2000;
  std::optional<std::string> cache_dir;
  unsigned threads = 0;

  // output
  std::optional<OutputFormat> format;
  std::optional<std::string> output;
  bool quiet = false;
};

/// m after command defaults: inward 10, sweep 10, SRS/MRS block m = r,
/// outward m = r.
std::size_t effective_m(const RunConfig& config);
OutputFormat effective_format(const RunConfig& config);
bool supports_csv(Command command) noexcept;

using Environment = std::map<std::string, std::string>;

/// Outcome of parse_config: a config, or a message with the exit status
/// (0 for --help/--version, 2 for usage errors).
struct ParseResult {
  std::optional<RunConfig> config;
  std::string message;
  int exit_code = 0;
};

/// args excludes the program name. A missing --seed is drawn from entropy
/// and flagged; the cache directory falls back to the environment.
ParseResult parse_config(const std::vector<std::string>& args, const Environment& environment);

/// Range checks; returns every violation, empty when valid.
std::vector<std::string> validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
/// Inverse of to_json; throws Error(ErrorCode::usage) on malformed echoes.
RunConfig config_from_json(const nlohmann::json& echo);

}  // namespace tailtest::cli
