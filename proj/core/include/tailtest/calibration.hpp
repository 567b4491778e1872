#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include "tailtest/statistics.hpp"

namespace tailtest {

inline constexpr std::size_t kDefaultTableReplicates = 50'000;
inline constexpr std::size_t kDefaultCalibrationReplicates = 10'000;
inline constexpr std::uint64_t kDefaultTableSeed = 0x7A11'7E57'0000'0001ULL;
inline constexpr std::uint64_t kDefaultCalibrationSeed = 0x7A11'7E57'0000'0002ULL;
inline constexpr std::uint32_t kNullTableFormatVersion = 1;

/// Monte-Carlo null distribution of one statistic for samples of n Exp(1) draws.
struct NullTable {
  StatisticSpec spec;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<double> sorted_values;  ///< ascending, one per replicate
};

/// Replicate i is evaluated on RngStream::derive(seed, i), so the table is a
/// function of (spec, n, replicates, seed) alone, whatever the worker count.
NullTable build_null_table(const StatisticSpec& spec, std::size_t n, std::size_t replicates, std::uint64_t seed,
                           unsigned threads = 0);

/// Builds tables for several specs from the same replicate samples. Each
/// result is identical to what build_null_table would return on its own.
std::vector<NullTable> build_null_tables(std::span<const StatisticSpec> specs, std::size_t n, std::size_t replicates,
                                         std::uint64_t seed, unsigned threads = 0);

/// Right-tail p-value with the plus-one correction: (1 + #{draws >= observed}) / (R + 1).
double p_value(const NullTable& table, double observed);

/// Smallest table value t whose p_value is <= level, so that rejecting when
/// T >= t is the same decision as p <= level. Throws ErrorCode::resolution
/// when level * replicates < 1.
double critical_value(const NullTable& table, double level);

// --- persistence ------------------------------------------------------------

/// Binary layout (little-endian), see docs/null_table_format.md:
///   char[8] magic "TTNULL\0\0" | u32 version | u32 kind | u64 r | u64 j | u64 m
///   | u64 n | u64 replicates | u64 seed | f64 values[replicates] ascending
void save_null_table(const NullTable& table, const std::filesystem::path& path);
NullTable load_null_table(const std::filesystem::path& path);
std::string null_table_filename(const StatisticSpec& spec, std::size_t n, std::size_t replicates, std::uint64_t seed);

struct TableStoreOptions {
  std::size_t replicates = kDefaultTableReplicates;
  std::uint64_t seed = kDefaultTableSeed;
  unsigned threads = 0;
  std::optional<std::filesystem::path> directory;  ///< disk cache; memory only when empty
};

/// Memoizes null tables in memory and, optionally, on disk. Safe for
/// concurrent use: a missing table is built once while other callers wait.
/// Disk writes go to a temporary file that is renamed into place.
class TableStore {
 public:
  struct Counters {
    std::size_t memory_hits = 0;
    std::size_t disk_hits = 0;
    std::size_t built = 0;
  };

  explicit TableStore(TableStoreOptions options = {});

  std::shared_ptr<const NullTable> get(const StatisticSpec& spec, std::size_t n);

  /// Loads or builds every missing table for size n in one shared pass.
  void prefetch(std::span<const StatisticSpec> specs, std::size_t n);

  const TableStoreOptions& options() const noexcept { return options_; }
  Counters counters() const;

 private:
  using Key = std::tuple<StatisticSpec, std::size_t>;
  using Slot = std::shared_future<std::shared_ptr<const NullTable>>;

  std::shared_ptr<const NullTable> try_load(const StatisticSpec& spec, std::size_t n);
  void persist(const NullTable& table);

  TableStoreOptions options_;
  mutable std::mutex mutex_;
  std::map<Key, Slot> tables_;
  Counters counters_;
};

// --- outward marginal levels ------------------------------------------------

struct CalibrationStep {
  double b = 0.0;
  double achieved = 0.0;
};

struct MarginalLevelResult {
  StatisticKind kind = StatisticKind::max_sum;
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t m = 0;
  double target_a = 0.1;
  double b = 0.0;           ///< calibrated marginal level
  double achieved_a = 0.0;  ///< overall null rejection rate at b
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  std::vector<CalibrationStep> trace;
};

struct CalibrationOptions {
  std::size_t replicates = kDefaultCalibrationReplicates;
  std::uint64_t seed = kDefaultCalibrationSeed;
  double tolerance = 0.005;
  unsigned threads = 0;
};

/// Rank-j member of an outward family: SS(j), SRS(j,m), MS(j) or MRS(j,m).
StatisticSpec outward_spec(StatisticKind kind, std::size_t j, std::size_t m);

/// Minimum marginal p-value over ranks 1..r of one outward family on a sample.
double outward_min_p(std::span<const double> descending, StatisticKind kind, std::size_t r, std::size_t m,
                     std::span<const std::shared_ptr<const NullTable>> tables);

/// Finds the marginal level b in [a^r, a] whose outward procedure has overall
/// null level within tolerance of target_a, by bisection over fresh null
/// samples. r = 1 returns b = a. Throws CalibrationError (carrying the best
/// b) when the bracket collapses first.
MarginalLevelResult calibrate_outward_b(StatisticKind kind, std::size_t n, std::size_t r, std::size_t m,
                                        double target_a, TableStore& tables, const CalibrationOptions& options = {});

/// Memoizes calibrate_outward_b results per (kind, n, r, m, a).
class OutwardLevelStore {
 public:
  OutwardLevelStore(TableStore& tables, CalibrationOptions options = {});

  MarginalLevelResult get(StatisticKind kind, std::size_t n, std::size_t r, std::size_t m, double target_a);

  TableStore& tables() noexcept { return tables_; }
  const CalibrationOptions& options() const noexcept { return options_; }

 private:
  using Key = std::tuple<StatisticKind, std::size_t, std::size_t, std::size_t, double>;
  TableStore& tables_;
  CalibrationOptions options_;
  std::mutex mutex_;
  std::map<Key, std::shared_future<MarginalLevelResult>> results_;
};

}  // namespace tailtest
