#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "tailtest/ordered_sample.hpp"
#include "tailtest/rng.hpp"

namespace tailtest {

/// Exp(alpha) shifted to start at lower_truncation: F(x) = 1 - exp(-alpha (x - lower_truncation)).
struct ExponentialParams {
  double alpha = 1.0;
  double lower_truncation = 0.0;
};

/// Pareto tail F(x) = 1 - (x/u)^(-alpha), x >= u.
struct ParetoParams {
  double alpha = 1.0;
  double u = 1.0;
};

/// Weibull F(x) = 1 - exp(-(x/tau)^kappa); kappa = 1 is Exp(1/tau).
struct WeibullParams {
  double kappa = 1.0;
  double tau = 1.0;
};

struct NormalParams {
  double mu = 0.0;
  double sigma = 1.0;
};

using FamilyParams = std::variant<ExponentialParams, ParetoParams, WeibullParams, NormalParams>;

/// Throws ErrorCode::parameter_domain when the parameters break the family's invariants.
void validate(const FamilyParams& params);

double cdf(const FamilyParams& params, double x);
double log_pdf(const FamilyParams& params, double x);
double pdf(const FamilyParams& params, double x);

/// One draw; consumes the stream deterministically.
double draw(const FamilyParams& params, RngStream& rng);

/// n independent draws, returned sorted descending.
OrderedSample sample(const FamilyParams& params, std::size_t n, RngStream& rng);

// --- maximum likelihood -----------------------------------------------------

/// alpha = 1 / mean(x - u). Throws degenerate_sample when every value equals u.
ExponentialParams mle_exponential(const OrderedSample& sample, double lower_truncation = 0.0);

/// Asymptotic standard error alpha / sqrt(n) of the exponential (or Pareto) MLE.
double mle_standard_error(double alpha, std::size_t n);

/// alpha = n / sum log(x / u).
ParetoParams mle_pareto(const OrderedSample& sample, double u);

/// log(x / u) for every value; order is preserved.
OrderedSample pareto_to_exp(const OrderedSample& sample, double u);

double exponential_loglik(const OrderedSample& sample, const ExponentialParams& params);
double pareto_loglik(const OrderedSample& sample, const ParetoParams& params);

struct WeibullFit {
  WeibullParams params;
  double loglik = 0.0;
  int iterations = 0;
};

/// Weibull MLE: the profile score in kappa is solved by safeguarded Newton
/// with a bisection fallback on [1e-3, 1e3]. Throws NumericError (with the
/// kappa iterates) when the score has no root in the bracket.
WeibullFit fit_weibull(const OrderedSample& sample);

// --- empirical CCDF ---------------------------------------------------------

struct CcdfPoint {
  double value = 0.0;
  double probability = 0.0;
};

/// Point i (0-based, descending) is (x_(i+1), (i+1)/n); ties keep separate ranks.
std::vector<CcdfPoint> empirical_ccdf(const OrderedSample& sample);

// --- layered Pareto ---------------------------------------------------------

struct LayeredParetoFit {
  std::vector<double> breakpoints;  ///< ascending; breakpoints[0] is the lower threshold
  std::vector<double> alphas;       ///< one exponent per layer
  std::vector<std::size_t> counts;  ///< observations per layer, sums to n
  double loglik = 0.0;
};

/// Piecewise power law with continuous CCDF: layer l covers (b_l, b_{l+1}]
/// (the first layer also includes b_0) and the top layer is unbounded. Each
/// exponent maximises its conditional likelihood given X > b_l, with points
/// above b_{l+1} entering as censored at b_{l+1}, which is closed form.
LayeredParetoFit fit_layered_pareto(const OrderedSample& sample, std::span<const double> breakpoints);

// --- tests ------------------------------------------------------------------

/// Upper chi-square(df) tail at 2 (loglik_alt - loglik_null). Throws
/// optimization_failure when the alternative is worse beyond tolerance.
double likelihood_ratio_test(double loglik_null, double loglik_alt, std::size_t df);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov survival Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2), 100 terms.
double kolmogorov_survival(double lambda);

/// One-sample KS against a continuous CDF, asymptotic p-value.
KsResult ks_test(const OrderedSample& sample, const std::function<double(double)>& reference_cdf);
KsResult ks_test(const OrderedSample& sample, const FamilyParams& reference);
/// KS test of Exponentiality with the rate fitted by MLE (Lilliefors type).
/// The plug-in statistic is scale-free under the null, so its law at each n
/// is simulated once (fixed seed, `replicates` draws) and memoized;
/// p = (1 + #{null >= D}) / (R + 1).
KsResult ks_exponential_fitted(const OrderedSample& sample, std::size_t replicates = 20'000);
/// Two-sample KS, asymptotic p-value.
KsResult ks_test(const OrderedSample& first, const OrderedSample& second);

struct WeibullLrtResult {
  WeibullFit weibull;
  ExponentialParams exponential;
  double statistic = 0.0;  ///< 2 (loglik_weibull - loglik_exponential)
  double p_value = 1.0;
};

/// LRT of Weibull against Exponential (df = 1) on a sample of positive values.
WeibullLrtResult weibull_vs_exponential_lrt(const OrderedSample& sample);

}  // namespace tailtest
