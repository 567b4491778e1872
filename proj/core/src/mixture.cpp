#include "tailtest/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "tailtest/distributions.hpp"
#include "tailtest/error.hpp"
#include "tailtest/parallel.hpp"
#include "tailtest/rng.hpp"

namespace tailtest {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogRootTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double sample_sd(std::span<const double> x) {
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return x.size() > 1 ? std::sqrt(ss / static_cast<double>(x.size() - 1)) : 0.0;
}

void check_sample(const OrderedSample& sample) {
  if (sample.size() < 4) throw Error(ErrorCode::degenerate_sample, "mixture fit needs at least four observations");
  if (sample.smallest() < 0.0) throw Error(ErrorCode::parameter_domain, "mixture fit needs nonnegative observations");
  if (!(sample.largest() > sample.smallest())) {
    throw Error(ErrorCode::degenerate_sample, "mixture fit needs at least two distinct values");
  }
}

void check_params(const MixtureParams& p) {
  if (!(p.pi >= 0.0 && p.pi <= 1.0)) throw Error(ErrorCode::parameter_domain, "mixture weight pi must be in [0, 1]");
  if (!(p.alpha > 0.0 && std::isfinite(p.alpha))) throw Error(ErrorCode::parameter_domain, "mixture alpha must be > 0");
  if (!std::isfinite(p.mu)) throw Error(ErrorCode::parameter_domain, "mixture mu must be finite");
  if (!(p.sigma > 0.0 && std::isfinite(p.sigma))) throw Error(ErrorCode::parameter_domain, "mixture sigma must be > 0");
}

// Fills gamma with Gaussian responsibilities and returns the loglik.
double e_step(std::span<const double> x, const MixtureParams& p, std::vector<double>& gamma) {
  const double log_pi = p.pi > 0.0 ? std::log(p.pi) : kNegInf;
  const double log_rest = p.pi < 1.0 ? std::log1p(-p.pi) : kNegInf;
  const double log_alpha = std::log(p.alpha);
  const double log_sigma = std::log(p.sigma);
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = log_pi + log_alpha - p.alpha * x[i];
    const double z = (x[i] - p.mu) / p.sigma;
    const double b = log_rest - kLogRootTwoPi - log_sigma - 0.5 * z * z;
    const double both = log_sum_exp(a, b);
    gamma[i] = b == kNegInf ? 0.0 : std::exp(b - both);
    total += both;
  }
  return total;
}

}  // namespace

double mixture_loglik(const OrderedSample& sample, const MixtureParams& params) {
  check_params(params);
  std::vector<double> gamma(sample.size());
  return e_step(sample.values(), params, gamma);
}

MixtureFit em_fit(const OrderedSample& sample, const MixtureParams& init, const EmOptions& options) {
  check_sample(sample);
  check_params(init);
  const auto x = sample.values();
  const std::size_t n = x.size();
  const auto nd = static_cast<double>(n);

  MixtureFit fit;
  fit.sigma_floor = options.sigma_floor_fraction * sample_sd(x);
  fit.params = init;
  fit.params.sigma = std::max(fit.params.sigma, fit.sigma_floor);
  fit.responsibilities.assign(n, 0.0);

  MixtureParams& p = fit.params;
  for (fit.iterations = 0; fit.iterations < options.max_iterations; ++fit.iterations) {
    const double ll = e_step(x, p, fit.responsibilities);
    if (!std::isfinite(ll)) throw NumericError("mixture loglik became non-finite", fit.loglik_trace);
    fit.loglik = ll;
    fit.loglik_trace.push_back(ll);
    const std::size_t k = fit.loglik_trace.size();
    if (k > 1 && ll - fit.loglik_trace[k - 2] < options.tolerance) {
      fit.converged = true;
      break;
    }
    // M-step.
    double g_sum = 0.0, gx_sum = 0.0, hx_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g_sum += fit.responsibilities[i];
      gx_sum += fit.responsibilities[i] * x[i];
      hx_sum += (1.0 - fit.responsibilities[i]) * x[i];
    }
    const double h_sum = nd - g_sum;
    p.pi = std::clamp(h_sum / nd, 0.0, 1.0);
    // Constrained M-step for pi: the objective is concave, so clamping is exact.
    if (g_sum > 0.0) p.pi = std::min(p.pi, 1.0 - std::min(options.min_outlier_mass, nd - 1.0) / nd);
    if (h_sum > 0.0 && hx_sum > 0.0) p.alpha = h_sum / hx_sum;
    if (g_sum > 0.0) {
      p.mu = gx_sum / g_sum;
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) var += fit.responsibilities[i] * (x[i] - p.mu) * (x[i] - p.mu);
      p.sigma = std::max(std::sqrt(var / g_sum), fit.sigma_floor);
    }
  }
  if (!fit.converged) {
    // The loop ran out after an M-step; report the loglik of the final parameters.
    fit.loglik = e_step(x, p, fit.responsibilities);
    if (!std::isfinite(fit.loglik)) throw NumericError("mixture loglik became non-finite", fit.loglik_trace);
    fit.loglik_trace.push_back(fit.loglik);
  }
  const double claimed = std::accumulate(fit.responsibilities.begin(), fit.responsibilities.end(), 0.0);
  fit.degenerate = p.pi < 1.0 && claimed < options.degenerate_mass;
  fit.k_hat = static_cast<std::size_t>(
      std::count_if(fit.responsibilities.begin(), fit.responsibilities.end(), [](double g) { return g > 0.5; }));
  return fit;
}

std::vector<MixtureParams> mixture_starts(const OrderedSample& sample, const EmOptions& options) {
  check_sample(sample);
  const auto x = sample.values();
  const std::size_t n = x.size();
  const double floor = options.sigma_floor_fraction * sample_sd(x);
  std::vector<std::size_t> sizes;
  for (std::size_t m0 : {std::max<std::size_t>(2, n / 10), std::max<std::size_t>(3, n / 5),
                         std::max<std::size_t>(4, n / 4)}) {
    m0 = std::min(m0, n - 2);
    if (std::find(sizes.begin(), sizes.end(), m0) == sizes.end()) sizes.push_back(m0);
  }
  std::vector<MixtureParams> starts;
  for (std::size_t m0 : sizes) {
    const auto top = x.first(m0);
    const auto rest = x.subspan(m0);
    MixtureParams p;
    p.pi = 1.0 - static_cast<double>(m0) / static_cast<double>(n);
    p.mu = std::accumulate(top.begin(), top.end(), 0.0) / static_cast<double>(m0);
    p.sigma = std::max(sample_sd(top), floor);
    const double rest_mean = std::accumulate(rest.begin(), rest.end(), 0.0) / static_cast<double>(rest.size());
    p.alpha = rest_mean > 0.0 ? 1.0 / rest_mean : 1.0 / sample.mean();
    starts.push_back(p);
  }
  return starts;
}

MixtureFit fit_mixture(const OrderedSample& sample, const EmOptions& options) {
  std::optional<MixtureFit> best;
  for (const auto& start : mixture_starts(sample, options)) {
    MixtureFit fit = em_fit(sample, start, options);
    // A singleton Gaussian spike beats any honest fit on likelihood alone,
    // so degenerate fits only win when every start collapses.
    const bool better = !best || (options.prefer_nondegenerate && best->degenerate != fit.degenerate
                                       ? !fit.degenerate
                                       : fit.loglik > best->loglik);
    if (better) best = std::move(fit);
  }
  return std::move(*best);
}

std::vector<std::size_t> classify_outliers(const MixtureFit& fit, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fit.responsibilities.size(); ++i) {
    if (fit.responsibilities[i] > threshold) out.push_back(i);
  }
  return out;
}

std::size_t weight_count(const MixtureFit& fit) {
  const double n = static_cast<double>(fit.responsibilities.size());
  return static_cast<std::size_t>(std::lround(n * (1.0 - fit.params.pi)));
}

double mixture_lrt_statistic(const OrderedSample& sample, const MixtureFit& fit) {
  const ExponentialParams exp_fit = mle_exponential(sample, 0.0);
  const double null_ll = exponential_loglik(sample, exp_fit);
  return 2.0 * std::max(0.0, fit.loglik - null_ll);
}

MixtureNullStore::MixtureNullStore(MixtureNullOptions options) : options_(options) {}

std::shared_ptr<const std::vector<double>> MixtureNullStore::get(std::size_t n) {
  if (n < 4) throw Error(ErrorCode::degenerate_sample, "mixture null needs n >= 4");
  std::promise<std::shared_ptr<const std::vector<double>>> promise;
  std::shared_future<std::shared_ptr<const std::vector<double>>> future;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    if (auto it = nulls_.find(n); it != nulls_.end()) {
      future = it->second;
    } else {
      future = promise.get_future().share();
      nulls_.emplace(n, future);
      owner = true;
    }
  }
  if (owner) {
    try {
      std::vector<double> stats(options_.replicates);
      parallel_for(options_.replicates, options_.threads, [&](std::size_t i) {
        RngStream rng = RngStream::derive(options_.seed, i);
        const OrderedSample x = sample(ExponentialParams{1.0, 0.0}, n, rng);
        stats[i] = mixture_lrt_statistic(x, fit_mixture(x, options_.em));
      });
      std::sort(stats.begin(), stats.end());
      promise.set_value(std::make_shared<const std::vector<double>>(std::move(stats)));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(mutex_);
      nulls_.erase(n);
    }
  }
  return future.get();
}

MixtureLrtResult mixture_lrt(const OrderedSample& sample, const MixtureFit& fit, MixtureNullStore& nulls) {
  MixtureLrtResult result;
  result.exponential_loglik = exponential_loglik(sample, mle_exponential(sample, 0.0));
  result.statistic = 2.0 * std::max(0.0, fit.loglik - result.exponential_loglik);
  const auto null = nulls.get(sample.size());
  result.replicates = null->size();
  const auto at_least = null->end() - std::lower_bound(null->begin(), null->end(), result.statistic);
  result.p_value = static_cast<double>(1 + at_least) / static_cast<double>(null->size() + 1);
  return result;
}

}  // namespace tailtest
