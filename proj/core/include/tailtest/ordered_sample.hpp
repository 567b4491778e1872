#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace tailtest {

/// Nonempty sample of finite reals held in descending order, so that
/// values()[0] is the largest observation x_(1).
class OrderedSample {
 public:
  /// Sorts the input descending. Throws on empty input or non-finite values.
  explicit OrderedSample(std::vector<double> values);

  /// Adopts values that are already descending; throws if they are not.
  static OrderedSample from_descending(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  /// x_(rank) with the 1-based rank convention of order statistics.
  double order_stat(std::size_t rank) const { return values_.at(rank - 1); }

  double largest() const noexcept { return values_.front(); }
  double smallest() const noexcept { return values_.back(); }
  double sum() const noexcept;
  double mean() const noexcept { return sum() / static_cast<double>(size()); }

  /// The k largest observations.
  OrderedSample top(std::size_t k) const;
  /// The sample with its k largest observations removed.
  OrderedSample drop_top(std::size_t k) const;
  OrderedSample scaled(double factor) const;
  /// Values minus a constant; the caller guarantees order is preserved.
  OrderedSample shifted(double offset) const;

  bool operator==(const OrderedSample&) const = default;

 private:
  struct Trusted {};
  OrderedSample(std::vector<double> values, Trusted) : values_(std::move(values)) {}

  std::vector<double> values_;
};

/// True when the span is sorted descending.
bool is_descending(std::span<const double> values) noexcept;

}  // namespace tailtest
