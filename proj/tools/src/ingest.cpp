#include "tailtest/cli/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string_view>

#include "tailtest/error.hpp"

namespace tailtest::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"'");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"'");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  if (line.find(',') != std::string_view::npos) {
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ';' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != ';' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(trim(line.substr(i, j - i)));
    i = j;
  }
  return fields;
}

std::optional<double> to_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::input, "cannot open " + path.string());
  return in;
}

std::string join_lines(const std::vector<std::size_t>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size() && i < 20; ++i) out += (i ? ", " : "") + std::to_string(lines[i]);
  if (lines.size() > 20) out += ", ...";
  return out;
}

}  // namespace

IngestResult ingest_sample(std::istream& in, const IngestOptions& options) {
  IngestResult result;
  std::optional<std::size_t> index;
  std::optional<std::string> wanted_name;
  if (options.column) {
    if (auto v = to_number(*options.column); v && *v >= 1 && std::floor(*v) == *v) {
      index = static_cast<std::size_t>(*v) - 1;
    } else {
      wanted_name = *options.column;
    }
  } else {
    index = 0;
  }

  std::vector<double> values;
  std::vector<std::size_t> value_lines;
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skippable(line)) continue;
    ++result.rows;
    const auto fields = split(line);
    if (first_row) {
      first_row = false;
      if (wanted_name) {
        const auto it = std::find(fields.begin(), fields.end(), *wanted_name);
        if (it == fields.end()) throw Error(ErrorCode::input, "no column named '" + *wanted_name + "' in the header");
        index = static_cast<std::size_t>(it - fields.begin());
        result.header = line;
        result.skipped.push_back({line_no, "header"});
        continue;
      }
      if (*index < fields.size() && !to_number(fields[*index])) {
        result.header = line;
        result.skipped.push_back({line_no, "header"});
        continue;
      }
    }
    if (*index >= fields.size()) {
      result.skipped.push_back({line_no, "missing column " + std::to_string(*index + 1)});
      continue;
    }
    const auto value = to_number(fields[*index]);
    if (!value) {
      result.skipped.push_back({line_no, "not a finite number: '" + std::string(fields[*index]) + "'"});
      continue;
    }
    if (options.threshold && *value < *options.threshold) {
      ++result.below_threshold;
      continue;
    }
    values.push_back(*value);
    value_lines.push_back(line_no);
  }
  if (values.empty()) throw Error(ErrorCode::input, "no numeric rows in the input");

  if (options.transform != Transform::none) {
    const bool log = options.transform == Transform::log;
    if (options.transform == Transform::excess && !options.threshold) {
      throw Error(ErrorCode::usage, "--transform excess needs --u");
    }
    const double u = options.threshold.value_or(1.0);
    if (log && !(u > 0.0)) throw Error(ErrorCode::parameter_domain, "--transform log needs u > 0");
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (log && !(values[i] > 0.0)) bad.push_back(value_lines[i]);
    }
    if (!bad.empty()) {
      throw Error(ErrorCode::parameter_domain,
                  "log transform needs positive values; offending lines: " + join_lines(bad));
    }
    for (double& v : values) v = log ? std::log(v / u) : v - u;
  }
  result.sample = OrderedSample(std::move(values));
  return result;
}

IngestResult ingest_sample(const std::filesystem::path& path, const IngestOptions& options) {
  auto in = open(path);
  return ingest_sample(in, options);
}

PriceIngest ingest_prices(std::istream& in, double delta) {
  PriceIngest result;
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> ticks;
  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skippable(line)) continue;
    ++result.rows;
    const auto fields = split(line);
    const auto t = fields.size() >= 2 ? to_number(fields[0]) : std::nullopt;
    const auto p = fields.size() >= 2 ? to_number(fields[1]) : std::nullopt;
    if (!t || !p) {
      result.skipped.push_back({line_no, first_row ? "header" : "expected timestamp,price[,day]"});
      first_row = false;
      continue;
    }
    first_row = false;
    if (!(*p > 0.0)) {
      result.skipped.push_back({line_no, "price must be > 0"});
      continue;
    }
    std::string day = fields.size() >= 3 && !fields[2].empty()
                          ? std::string(fields[2])
                          : std::to_string(static_cast<long long>(std::floor(*t / 86400.0)));
    auto [it, inserted] = ticks.try_emplace(day);
    if (inserted) order.push_back(day);
    it->second.emplace_back(*t, *p);
  }
  if (order.empty()) throw Error(ErrorCode::input, "no timestamp,price rows in the input");

  for (const auto& day : order) {
    auto& rows = ticks[day];
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> ts, ps;
    for (const auto& [t, p] : rows) {
      if (!ts.empty() && ts.back() == t) {
        ps.back() = p;
        ++result.duplicate_timestamps;
        continue;
      }
      ts.push_back(t);
      ps.push_back(p);
    }
    result.days.push_back(resample_last_price(day, ts, ps, delta));
  }
  return result;
}

PriceIngest ingest_prices(const std::vector<std::filesystem::path>& paths, double delta) {
  // Concatenate so a day split across files is still one series.
  std::string all;
  for (const auto& path : paths) {
    auto in = open(path);
    all.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (!all.empty() && all.back() != '\n') all += '\n';
  }
  std::istringstream in(all);
  return ingest_prices(in, delta);
}

}  // namespace tailtest::cli
