#include "tailtest/ordered_sample.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "tailtest/error.hpp"

namespace tailtest {

namespace {

void require_valid(const std::vector<double>& values) {
  if (values.empty()) {
    throw Error(ErrorCode::degenerate_sample, "sample must contain at least one observation");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::parameter_domain, "non-finite observation at position " + std::to_string(i));
    }
  }
}

}  // namespace

bool is_descending(std::span<const double> values) noexcept {
  return std::is_sorted(values.begin(), values.end(), std::greater<>());
}

OrderedSample::OrderedSample(std::vector<double> values) : values_(std::move(values)) {
  require_valid(values_);
  std::sort(values_.begin(), values_.end(), std::greater<>());
}

OrderedSample OrderedSample::from_descending(std::vector<double> values) {
  require_valid(values);
  if (!is_descending(values)) {
    throw Error(ErrorCode::parameter_domain, "values are not in descending order");
  }
  return OrderedSample(std::move(values), Trusted{});
}

double OrderedSample::sum() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

OrderedSample OrderedSample::top(std::size_t k) const {
  if (k == 0 || k > size()) {
    throw Error(ErrorCode::spec, "top(" + std::to_string(k) + ") outside 1.." + std::to_string(size()));
  }
  return OrderedSample(std::vector<double>(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(k)),
                       Trusted{});
}

OrderedSample OrderedSample::drop_top(std::size_t k) const {
  if (k >= size()) {
    throw Error(ErrorCode::spec, "drop_top(" + std::to_string(k) + ") would empty a sample of size " +
                                     std::to_string(size()));
  }
  return OrderedSample(std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(k), values_.end()),
                       Trusted{});
}

OrderedSample OrderedSample::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::parameter_domain, "scale factor must be positive and finite");
  }
  std::vector<double> out(values_);
  for (auto& v : out) v *= factor;
  return OrderedSample(std::move(out), Trusted{});
}

OrderedSample OrderedSample::shifted(double offset) const {
  std::vector<double> out(values_);
  for (auto& v : out) v -= offset;
  return OrderedSample(std::move(out), Trusted{});
}

}  // namespace tailtest
