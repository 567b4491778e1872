#include <algorithm>
#include <array>
#include <atomic>
#include <cstring>
#include <fstream>
#include <system_error>

#include "tailtest/calibration.hpp"
#include "tailtest/error.hpp"
#include "tailtest/rng.hpp"

namespace tailtest {

namespace {

constexpr std::array<char, 8> kMagic{'T', 'T', 'N', 'U', 'L', 'L', '\0', '\0'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::istream& in, const std::filesystem::path& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorCode::input, "truncated null table file " + path.string());
  }
  return value;
}

std::uint32_t kind_code(StatisticKind kind) { return static_cast<std::uint32_t>(kind); }

// The header stores r and j separately; rank goes to whichever the family uses.
std::pair<std::uint64_t, std::uint64_t> header_ranks(const StatisticSpec& spec) {
  return spec.is_max_type() ? std::pair<std::uint64_t, std::uint64_t>{0, spec.rank}
                            : std::pair<std::uint64_t, std::uint64_t>{spec.rank, 0};
}

std::atomic<std::uint64_t> temp_counter{0};

}  // namespace

std::string null_table_filename(const StatisticSpec& spec, std::size_t n, std::size_t replicates, std::uint64_t seed) {
  std::string kind(short_name(spec.kind));
  std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char c) { return std::tolower(c); });
  const auto [r, j] = header_ranks(spec);
  return kind + "_r" + std::to_string(r) + "_j" + std::to_string(j) + "_m" + std::to_string(spec.trim) + "_n" +
         std::to_string(n) + "_R" + std::to_string(replicates) + "_s" + std::to_string(seed) + "_v" +
         std::to_string(kNullTableFormatVersion) + ".bin";
}

void save_null_table(const NullTable& table, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const auto temp = path.string() + ".tmp" + std::to_string(derive_seed(reinterpret_cast<std::uintptr_t>(&table),
                                                                        temp_counter.fetch_add(1)));
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::input, "cannot write null table to " + temp);
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kNullTableFormatVersion);
    put<std::uint32_t>(out, kind_code(table.spec.kind));
    const auto [r, j] = header_ranks(table.spec);
    put<std::uint64_t>(out, r);
    put<std::uint64_t>(out, j);
    put<std::uint64_t>(out, table.spec.trim);
    put<std::uint64_t>(out, table.n);
    put<std::uint64_t>(out, table.replicates);
    put<std::uint64_t>(out, table.seed);
    out.write(reinterpret_cast<const char*>(table.sorted_values.data()),
              static_cast<std::streamsize>(table.sorted_values.size() * sizeof(double)));
    if (!out) throw Error(ErrorCode::input, "failed writing null table to " + temp);
  }
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    throw Error(ErrorCode::input, "cannot publish null table at " + path.string());
  }
}

NullTable load_null_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::input, "cannot open null table " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorCode::input, path.string() + " is not a null table file");
  const auto version = take<std::uint32_t>(in, path);
  if (version != kNullTableFormatVersion) {
    throw Error(ErrorCode::input, path.string() + ": unsupported null table version " + std::to_string(version));
  }
  const auto kind = take<std::uint32_t>(in, path);
  if (kind > kind_code(StatisticKind::weighted_spacings)) {
    throw Error(ErrorCode::input, path.string() + ": unknown statistic kind " + std::to_string(kind));
  }
  NullTable table;
  table.spec.kind = static_cast<StatisticKind>(kind);
  const auto r = take<std::uint64_t>(in, path);
  const auto j = take<std::uint64_t>(in, path);
  table.spec.rank = table.spec.is_max_type() ? j : r;
  table.spec.trim = take<std::uint64_t>(in, path);
  table.n = take<std::uint64_t>(in, path);
  table.replicates = take<std::uint64_t>(in, path);
  table.seed = take<std::uint64_t>(in, path);
  table.sorted_values.resize(table.replicates);
  in.read(reinterpret_cast<char*>(table.sorted_values.data()),
          static_cast<std::streamsize>(table.replicates * sizeof(double)));
  if (!in) throw Error(ErrorCode::input, "truncated null table file " + path.string());
  if (!std::is_sorted(table.sorted_values.begin(), table.sorted_values.end())) {
    throw Error(ErrorCode::input, path.string() + ": null table values are not ascending");
  }
  return table;
}

// --- TableStore -------------------------------------------------------------

TableStore::TableStore(TableStoreOptions options) : options_(std::move(options)) {}

TableStore::Counters TableStore::counters() const {
  std::lock_guard lock(mutex_);
  return counters_;
}

std::shared_ptr<const NullTable> TableStore::try_load(const StatisticSpec& spec, std::size_t n) {
  if (!options_.directory) return nullptr;
  const auto path = *options_.directory / null_table_filename(spec, n, options_.replicates, options_.seed);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return nullptr;
  try {
    auto table = std::make_shared<NullTable>(load_null_table(path));
    if (table->spec != spec || table->n != n || table->replicates != options_.replicates ||
        table->seed != options_.seed) {
      return nullptr;
    }
    return table;
  } catch (const Error&) {
    return nullptr;  // unreadable entries are rebuilt and overwritten
  }
}

void TableStore::persist(const NullTable& table) {
  if (!options_.directory) return;
  save_null_table(table, *options_.directory / null_table_filename(table.spec, table.n, table.replicates, table.seed));
}

std::shared_ptr<const NullTable> TableStore::get(const StatisticSpec& spec, std::size_t n) {
  validate(spec, n);
  const Key key{spec, n};
  Slot slot;
  {
    std::lock_guard lock(mutex_);
    if (auto it = tables_.find(key); it != tables_.end()) {
      ++counters_.memory_hits;
      slot = it->second;
    }
  }
  if (!slot.valid()) {
    prefetch(std::span(&spec, 1), n);
    std::lock_guard lock(mutex_);
    auto it = tables_.find(key);
    if (it == tables_.end()) throw Error(ErrorCode::numeric, "null table for " + spec.label() + " failed to build");
    slot = it->second;
  }
  return slot.get();
}

void TableStore::prefetch(std::span<const StatisticSpec> specs, std::size_t n) {
  for (const auto& spec : specs) validate(spec, n);
  std::vector<StatisticSpec> mine;
  std::vector<std::promise<std::shared_ptr<const NullTable>>> promises;
  {
    std::lock_guard lock(mutex_);
    for (const auto& spec : specs) {
      const Key key{spec, n};
      if (tables_.contains(key) || std::find(mine.begin(), mine.end(), spec) != mine.end()) continue;
      promises.emplace_back();
      tables_.emplace(key, promises.back().get_future().share());
      mine.push_back(spec);
    }
  }
  if (mine.empty()) return;

  std::vector<StatisticSpec> to_build;
  std::vector<std::size_t> build_slots;
  try {
    for (std::size_t i = 0; i < mine.size(); ++i) {
      if (auto table = try_load(mine[i], n)) {
        promises[i].set_value(std::move(table));
        std::lock_guard lock(mutex_);
        ++counters_.disk_hits;
      } else {
        to_build.push_back(mine[i]);
        build_slots.push_back(i);
      }
    }
    if (!to_build.empty()) {
      auto built = build_null_tables(to_build, n, options_.replicates, options_.seed, options_.threads);
      for (std::size_t b = 0; b < built.size(); ++b) {
        auto table = std::make_shared<const NullTable>(std::move(built[b]));
        try {
          persist(*table);
        } catch (const Error&) {
          // A read-only cache directory degrades to memory-only memoization.
        }
        promises[build_slots[b]].set_value(std::move(table));
      }
      std::lock_guard lock(mutex_);
      counters_.built += to_build.size();
    }
  } catch (...) {
    const auto failure = std::current_exception();
    std::lock_guard lock(mutex_);
    for (std::size_t b = 0; b < build_slots.size(); ++b) {
      tables_.erase(Key{mine[build_slots[b]], n});
      try {
        promises[build_slots[b]].set_exception(failure);
      } catch (const std::future_error&) {
      }
    }
    throw;
  }
}

}  // namespace tailtest
