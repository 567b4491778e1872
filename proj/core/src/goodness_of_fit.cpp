#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "tailtest/distributions.hpp"
#include "tailtest/error.hpp"
#include "tailtest/rng.hpp"

namespace tailtest {

namespace {

// Stephens' small-sample adjustment of the asymptotic KS argument.
double ks_p_value(double statistic, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic);
}

double plug_in_exponential_ks(const OrderedSample& sample) {
  return ks_test(sample, FamilyParams{mle_exponential(sample, 0.0)}).statistic;
}

constexpr std::uint64_t kKsNullSeed = 0x6b73'6e75'6c6cULL;

std::shared_ptr<const std::vector<double>> fitted_ks_null(std::size_t n, std::size_t replicates) {
  static std::mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const std::vector<double>>> memo;
  std::lock_guard lock(mutex);
  auto& slot = memo[{n, replicates}];
  if (!slot) {
    std::vector<double> values(replicates);
    for (std::size_t i = 0; i < replicates; ++i) {
      RngStream rng = RngStream::derive(kKsNullSeed + n, i);
      values[i] = plug_in_exponential_ks(sample(ExponentialParams{}, n, rng));
    }
    std::sort(values.begin(), values.end());
    slot = std::make_shared<const std::vector<double>>(std::move(values));
  }
  return slot;
}

}  // namespace

double likelihood_ratio_test(double loglik_null, double loglik_alt, std::size_t df) {
  if (df == 0) throw Error(ErrorCode::spec, "likelihood ratio test needs df >= 1");
  if (!std::isfinite(loglik_null) || !std::isfinite(loglik_alt)) {
    throw Error(ErrorCode::numeric, "non-finite log-likelihood in likelihood ratio test");
  }
  const double gain = loglik_alt - loglik_null;
  const double tolerance = 1e-8 * std::max(1.0, std::abs(loglik_null));
  if (gain < -tolerance) {
    throw Error(ErrorCode::optimization_failure,
                "alternative log-likelihood is below the nested null; the optimizer did not converge");
  }
  const double statistic = 2.0 * std::max(gain, 0.0);
  return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * statistic);
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 0.27) {
    // Jacobi theta form, converges fast where the alternating series does not.
    const double a = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int k = 1; k <= 7; k += 2) cdf += std::exp(-a * k * k);
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(const OrderedSample& sample, const std::function<double(double)>& reference_cdf) {
  const std::size_t n = sample.size();
  if (n < 2) throw Error(ErrorCode::degenerate_sample, "KS test needs at least two observations");
  const auto nd = static_cast<double>(n);
  double d = 0.0;
  // i-th smallest observation sits at descending position n - i.
  for (std::size_t i = 1; i <= n; ++i) {
    const double f = reference_cdf(sample[n - i]);
    d = std::max({d, static_cast<double>(i) / nd - f, f - static_cast<double>(i - 1) / nd});
  }
  return KsResult{d, ks_p_value(d, nd)};
}

KsResult ks_test(const OrderedSample& sample, const FamilyParams& reference) {
  validate(reference);
  return ks_test(sample, [&reference](double x) { return cdf(reference, x); });
}

KsResult ks_exponential_fitted(const OrderedSample& sample, std::size_t replicates) {
  if (replicates == 0) throw Error(ErrorCode::spec, "fitted KS test needs at least one null replicate");
  const double d = plug_in_exponential_ks(sample);
  const auto null = fitted_ks_null(sample.size(), replicates);
  const auto at_least = static_cast<double>(null->end() - std::lower_bound(null->begin(), null->end(), d));
  return KsResult{d, (1.0 + at_least) / (static_cast<double>(replicates) + 1.0)};
}

KsResult ks_test(const OrderedSample& first, const OrderedSample& second) {
  const std::size_t n1 = first.size();
  const std::size_t n2 = second.size();
  if (n1 < 2 || n2 < 2) throw Error(ErrorCode::degenerate_sample, "KS test needs at least two observations per sample");
  // Walk both samples from the top; the gap between the two empirical
  // survival functions is checked after each distinct value.
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n1 || j < n2) {
    double v;
    if (j >= n2 || (i < n1 && first[i] >= second[j])) v = first[i]; else v = second[j];
    while (i < n1 && first[i] == v) ++i;
    while (j < n2 && second[j] == v) ++j;
    const double gap = std::abs(static_cast<double>(i) / static_cast<double>(n1) -
                                static_cast<double>(j) / static_cast<double>(n2));
    d = std::max(d, gap);
  }
  const double ne = static_cast<double>(n1) * static_cast<double>(n2) / static_cast<double>(n1 + n2);
  return KsResult{d, ks_p_value(d, ne)};
}

WeibullLrtResult weibull_vs_exponential_lrt(const OrderedSample& sample) {
  if (sample.size() < 3) throw Error(ErrorCode::degenerate_sample, "Weibull LRT needs at least three observations");
  if (!(sample.smallest() > 0.0)) throw Error(ErrorCode::parameter_domain, "Weibull LRT needs positive observations");
  WeibullLrtResult result;
  result.weibull = fit_weibull(sample);
  result.exponential = mle_exponential(sample, 0.0);
  const double null_ll = exponential_loglik(sample, result.exponential);
  result.p_value = likelihood_ratio_test(null_ll, result.weibull.loglik, 1);
  result.statistic = 2.0 * std::max(result.weibull.loglik - null_ll, 0.0);
  return result;
}

}  // namespace tailtest
