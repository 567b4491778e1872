#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "tailtest/cli/config.hpp"
#include "tailtest/drawdowns.hpp"
#include "tailtest/ordered_sample.hpp"

namespace tailtest::cli {

struct SkippedRow {
  std::size_t line = 0;  ///< 1-based line number in the file
  std::string reason;
};

struct IngestOptions {
  std::optional<std::string> column;  ///< 1-based index or header name; default first column
  std::optional<double> threshold;
  Transform transform = Transform::none;
};

struct IngestResult {
  OrderedSample sample{std::vector<double>{0.0}};
  std::size_t rows = 0;  ///< non-blank, non-comment lines seen
  std::optional<std::string> header;
  std::vector<SkippedRow> skipped;  ///< includes the header row when present
  std::size_t below_threshold = 0;
};

/// Splits on commas when present, otherwise on tabs, semicolons or blanks.
/// Blank lines and lines starting with '#' are ignored. A first row whose
/// selected field is not numeric is taken as a header. Throws
/// Error(ErrorCode::input) when no numeric rows remain and
/// Error(ErrorCode::parameter_domain) naming the rows that break the log
/// transform.
IngestResult ingest_sample(std::istream& in, const IngestOptions& options);
IngestResult ingest_sample(const std::filesystem::path& path, const IngestOptions& options);

struct PriceIngest {
  std::vector<PriceSeries> days;  ///< chronological, resampled on the delta grid
  std::size_t rows = 0;
  std::vector<SkippedRow> skipped;
  std::size_t duplicate_timestamps = 0;  ///< ticks superseded by a later tick at the same time
};

/// Rows of timestamp,price[,day]; timestamps are seconds. Without a day
/// column the day is floor(timestamp / 86400). Days keep their order of
/// first appearance; ticks are sorted by time within a day.
PriceIngest ingest_prices(std::istream& in, double delta);
PriceIngest ingest_prices(const std::vector<std::filesystem::path>& paths, double delta);

}  // namespace tailtest::cli
