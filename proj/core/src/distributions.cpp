#include "tailtest/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tailtest/error.hpp"

namespace tailtest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::parameter_domain, what);
}

}  // namespace

void validate(const FamilyParams& params) {
  std::visit(overloaded{
                 [](const ExponentialParams& p) {
                   require(positive_finite(p.alpha), "exponential rate alpha must be > 0");
                   require(p.lower_truncation >= 0.0 && std::isfinite(p.lower_truncation),
                           "exponential lower truncation must be >= 0");
                 },
                 [](const ParetoParams& p) {
                   require(positive_finite(p.alpha), "pareto exponent alpha must be > 0");
                   require(positive_finite(p.u), "pareto threshold u must be > 0");
                 },
                 [](const WeibullParams& p) {
                   require(positive_finite(p.kappa), "weibull shape kappa must be > 0");
                   require(positive_finite(p.tau), "weibull scale tau must be > 0");
                 },
                 [](const NormalParams& p) {
                   require(std::isfinite(p.mu), "normal location mu must be finite");
                   require(positive_finite(p.sigma), "normal scale sigma must be > 0");
                 },
             },
             params);
}

double cdf(const FamilyParams& params, double x) {
  return std::visit(overloaded{
                        [x](const ExponentialParams& p) {
                          return x <= p.lower_truncation ? 0.0 : -std::expm1(-p.alpha * (x - p.lower_truncation));
                        },
                        [x](const ParetoParams& p) { return x <= p.u ? 0.0 : 1.0 - std::pow(x / p.u, -p.alpha); },
                        [x](const WeibullParams& p) {
                          return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / p.tau, p.kappa));
                        },
                        [x](const NormalParams& p) {
                          return 0.5 * std::erfc(-(x - p.mu) / (p.sigma * std::numbers::sqrt2));
                        },
                    },
                    params);
}

double log_pdf(const FamilyParams& params, double x) {
  return std::visit(
      overloaded{
          [x](const ExponentialParams& p) {
            return x < p.lower_truncation ? kNegInf : std::log(p.alpha) - p.alpha * (x - p.lower_truncation);
          },
          [x](const ParetoParams& p) {
            return x < p.u ? kNegInf : std::log(p.alpha) + p.alpha * std::log(p.u) - (p.alpha + 1.0) * std::log(x);
          },
          [x](const WeibullParams& p) {
            if (x < 0.0) return kNegInf;
            if (x == 0.0) {
              if (p.kappa < 1.0) return std::numeric_limits<double>::infinity();
              if (p.kappa > 1.0) return kNegInf;
              return -std::log(p.tau);
            }
            const double z = x / p.tau;
            return std::log(p.kappa) - std::log(p.tau) + (p.kappa - 1.0) * std::log(z) - std::pow(z, p.kappa);
          },
          [x](const NormalParams& p) {
            const double z = (x - p.mu) / p.sigma;
            return -0.5 * z * z - std::log(p.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
          },
      },
      params);
}

double pdf(const FamilyParams& params, double x) {
  const double lp = log_pdf(params, x);
  return lp == kNegInf ? 0.0 : std::exp(lp);
}

double draw(const FamilyParams& params, RngStream& rng) {
  return std::visit(overloaded{
                        [&rng](const ExponentialParams& p) { return p.lower_truncation + rng.exponential() / p.alpha; },
                        [&rng](const ParetoParams& p) { return p.u * std::exp(rng.exponential() / p.alpha); },
                        [&rng](const WeibullParams& p) { return p.tau * std::pow(rng.exponential(), 1.0 / p.kappa); },
                        [&rng](const NormalParams& p) { return p.mu + p.sigma * rng.normal(); },
                    },
                    params);
}

OrderedSample sample(const FamilyParams& params, std::size_t n, RngStream& rng) {
  validate(params);
  if (n == 0) throw Error(ErrorCode::parameter_domain, "sample size must be >= 1");
  std::vector<double> values(n);
  for (auto& v : values) v = draw(params, rng);
  return OrderedSample(std::move(values));
}

ExponentialParams mle_exponential(const OrderedSample& sample, double lower_truncation) {
  if (!(lower_truncation >= 0.0) || !std::isfinite(lower_truncation)) {
    throw Error(ErrorCode::parameter_domain, "lower truncation must be >= 0");
  }
  if (sample.smallest() < lower_truncation) {
    throw Error(ErrorCode::parameter_domain, "observation below the lower truncation");
  }
  double excess = 0.0;
  for (double v : sample.values()) excess += v - lower_truncation;
  const double mean_excess = excess / static_cast<double>(sample.size());
  if (!(mean_excess > 0.0)) {
    throw Error(ErrorCode::degenerate_sample, "all observations equal the lower truncation");
  }
  return ExponentialParams{1.0 / mean_excess, lower_truncation};
}

double mle_standard_error(double alpha, std::size_t n) { return alpha / std::sqrt(static_cast<double>(n)); }

OrderedSample pareto_to_exp(const OrderedSample& sample, double u) {
  if (!positive_finite(u)) throw Error(ErrorCode::parameter_domain, "pareto threshold u must be > 0");
  if (sample.smallest() < u) throw Error(ErrorCode::parameter_domain, "observation below the pareto threshold");
  std::vector<double> out(sample.size());
  std::transform(sample.values().begin(), sample.values().end(), out.begin(),
                 [u](double v) { return std::log(v / u); });
  return OrderedSample(std::move(out));
}

ParetoParams mle_pareto(const OrderedSample& sample, double u) {
  const ExponentialParams fit = mle_exponential(pareto_to_exp(sample, u), 0.0);
  return ParetoParams{fit.alpha, u};
}

double exponential_loglik(const OrderedSample& sample, const ExponentialParams& params) {
  validate(params);
  double excess = 0.0;
  for (double v : sample.values()) excess += v - params.lower_truncation;
  return static_cast<double>(sample.size()) * std::log(params.alpha) - params.alpha * excess;
}

double pareto_loglik(const OrderedSample& sample, const ParetoParams& params) {
  validate(params);
  double total = 0.0;
  for (double v : sample.values()) total += log_pdf(params, v);
  return total;
}

WeibullFit fit_weibull(const OrderedSample& sample) {
  constexpr double kLo = 1e-3;
  constexpr double kHi = 1e3;
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 200;

  if (sample.size() < 2) throw Error(ErrorCode::degenerate_sample, "weibull fit needs at least two observations");
  if (!(sample.smallest() > 0.0)) throw Error(ErrorCode::parameter_domain, "weibull fit needs positive observations");

  const auto n = static_cast<double>(sample.size());
  const double scale = sample.largest();
  std::vector<double> logs(sample.size());
  double mean_log = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    logs[i] = std::log(sample[i] / scale);
    mean_log += logs[i];
  }
  mean_log /= n;

  // Profile score g(k) = sum y^k ln y / sum y^k - 1/k - mean ln y with y = x / max(x),
  // strictly increasing in k; g'(k) is the y^k-weighted variance of ln y plus 1/k^2.
  auto score = [&](double k, double* slope) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double l : logs) {
      const double w = std::exp(k * l);
      s0 += w;
      s1 += w * l;
      s2 += w * l * l;
    }
    const double m1 = s1 / s0;
    if (slope) *slope = (s2 / s0 - m1 * m1) + 1.0 / (k * k);
    return m1 - 1.0 / k - mean_log;
  };

  std::vector<double> trace;
  double lo = kLo;
  double hi = kHi;
  const double g_lo = score(lo, nullptr);
  const double g_hi = score(hi, nullptr);
  if (!(g_lo < 0.0 && g_hi > 0.0)) {
    trace = {lo, g_lo, hi, g_hi};
    throw NumericError("weibull shape root is not bracketed in [1e-3, 1e3]; kappa diverges", std::move(trace));
  }

  double var_log = 0.0;
  for (double l : logs) var_log += (l - mean_log) * (l - mean_log);
  var_log /= n;
  double k = var_log > 0.0 ? std::numbers::pi / std::sqrt(6.0 * var_log) : 1.0;
  k = std::clamp(k, lo * 10.0, hi / 10.0);

  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIter; ++iter) {
    trace.push_back(k);
    double slope = 0.0;
    const double g = score(k, &slope);
    if (g == 0.0) {
      converged = true;
      break;
    }
    if (g < 0.0) lo = k; else hi = k;
    double next = k - g / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = std::sqrt(lo * hi);
    if (std::abs(next - k) <= kTol * k) {
      k = next;
      converged = true;
      break;
    }
    k = next;
  }
  if (!converged) throw NumericError("weibull shape iteration did not converge", std::move(trace));

  double sum_pow = 0.0;
  for (double l : logs) sum_pow += std::exp(k * l);
  const double tau = scale * std::pow(sum_pow / n, 1.0 / k);

  WeibullFit fit;
  fit.params = WeibullParams{k, tau};
  fit.iterations = iter + 1;
  double ll = 0.0;
  for (double v : sample.values()) ll += log_pdf(fit.params, v);
  fit.loglik = ll;
  return fit;
}

std::vector<CcdfPoint> empirical_ccdf(const OrderedSample& sample) {
  const auto n = static_cast<double>(sample.size());
  std::vector<CcdfPoint> points(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    points[i] = CcdfPoint{sample[i], static_cast<double>(i + 1) / n};
  }
  return points;
}

LayeredParetoFit fit_layered_pareto(const OrderedSample& sample, std::span<const double> breakpoints) {
  if (breakpoints.empty()) throw Error(ErrorCode::layering, "at least one breakpoint (the threshold) is required");
  if (!positive_finite(breakpoints.front())) throw Error(ErrorCode::parameter_domain, "lowest breakpoint must be > 0");
  for (std::size_t l = 1; l < breakpoints.size(); ++l) {
    if (!(breakpoints[l] > breakpoints[l - 1]) || !std::isfinite(breakpoints[l])) {
      throw Error(ErrorCode::layering, "breakpoints must be strictly ascending");
    }
  }
  if (sample.smallest() < breakpoints.front()) {
    throw Error(ErrorCode::parameter_domain, "observation below the lowest breakpoint");
  }

  const std::size_t layers = breakpoints.size();
  std::vector<std::size_t> counts(layers, 0);
  std::vector<double> log_excess(layers, 0.0);
  double sum_log = 0.0;
  for (double v : sample.values()) {
    std::size_t l = 0;
    while (l + 1 < layers && v > breakpoints[l + 1]) ++l;
    ++counts[l];
    log_excess[l] += std::log(v / breakpoints[l]);
    sum_log += std::log(v);
  }

  LayeredParetoFit fit;
  fit.breakpoints.assign(breakpoints.begin(), breakpoints.end());
  fit.counts = counts;
  fit.alphas.resize(layers);
  std::size_t above = sample.size();
  double loglik = -sum_log;
  for (std::size_t l = 0; l < layers; ++l) {
    if (counts[l] == 0) {
      throw Error(ErrorCode::layering, "layer " + std::to_string(l) + " holds no observations");
    }
    above -= counts[l];
    double exposure = log_excess[l];
    if (l + 1 < layers) exposure += static_cast<double>(above) * std::log(breakpoints[l + 1] / breakpoints[l]);
    if (!(exposure > 0.0)) {
      throw Error(ErrorCode::degenerate_sample, "layer " + std::to_string(l) + " has no spread above its threshold");
    }
    const double alpha = static_cast<double>(counts[l]) / exposure;
    fit.alphas[l] = alpha;
    loglik += static_cast<double>(counts[l]) * std::log(alpha) - alpha * exposure;
  }
  fit.loglik = loglik;
  return fit;
}

}  // namespace tailtest
