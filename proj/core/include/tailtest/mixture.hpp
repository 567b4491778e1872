#pragma once

#include <cstddef>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "tailtest/ordered_sample.hpp"

namespace tailtest {

/// pi Exp(x; alpha) + (1 - pi) Norm(x; mu, sigma). pi is the weight of the
/// Exponential (regular) component; the Gaussian carries the outliers.
struct MixtureParams {
  double pi = 1.0;
  double alpha = 1.0;
  double mu = 0.0;
  double sigma = 1.0;
};

struct MixtureFit {
  MixtureParams params;
  double loglik = 0.0;
  /// Posterior probability of the Gaussian component, aligned with the
  /// sample's descending order.
  std::vector<double> responsibilities;
  std::size_t k_hat = 0;  ///< count of responsibilities > 0.5
  int iterations = 0;
  bool converged = false;
  /// The Gaussian has collapsed onto about one point.
  bool degenerate = false;
  double sigma_floor = 0.0;
  std::vector<double> loglik_trace;  ///< loglik after every E-step
};

struct EmOptions {
  double tolerance = 1e-8;  ///< stop when the loglik gain drops below this
  int max_iterations = 1000;
  double sigma_floor_fraction = 1e-3;  ///< sigma floor as a fraction of the sample SD
  /// Lower bound on n (1 - pi) while the Gaussian is active, so a single
  /// point cannot form its own component. 0 leaves pi unconstrained.
  double min_outlier_mass = 2.0;
  /// A fit whose Gaussian claims less total responsibility than this is degenerate.
  double degenerate_mass = 1.5;
  /// fit_mixture picks the best non-degenerate start when one exists.
  bool prefer_nondegenerate = true;
};

double mixture_loglik(const OrderedSample& sample, const MixtureParams& params);

/// EM from one starting point. Throws ErrorCode::parameter_domain on
/// negative data or an invalid start, degenerate_sample for n < 4, and
/// NumericError if the loglik becomes non-finite.
MixtureFit em_fit(const OrderedSample& sample, const MixtureParams& init, const EmOptions& options = {});

/// Deterministic starts: the top m0 points seed (mu, sigma), the rest
/// alpha, pi = 1 - m0/n, for m0 in {max(2, n/10), max(3, n/5), max(4, n/4)}.
std::vector<MixtureParams> mixture_starts(const OrderedSample& sample, const EmOptions& options = {});

/// Best loglik over mixture_starts.
MixtureFit fit_mixture(const OrderedSample& sample, const EmOptions& options = {});

/// Indices (into the descending sample) with responsibility > threshold.
std::vector<std::size_t> classify_outliers(const MixtureFit& fit, double threshold = 0.5);

/// round(n (1 - pi)), the weight-based outlier count. Agrees with k_hat to
/// within one on well separated fits.
std::size_t weight_count(const MixtureFit& fit);

/// 2 max(0, loglik_mixture - loglik_exponential).
double mixture_lrt_statistic(const OrderedSample& sample, const MixtureFit& fit);

struct MixtureNullOptions {
  std::size_t replicates = 2000;
  std::uint64_t seed = 0x7A11'7E57'0000'0003ULL;
  unsigned threads = 0;
  EmOptions em;
};

/// Monte-Carlo null of the mixture LRT statistic for Exp(1) samples of size
/// n, memoized per n. The statistic is scale free, so Exp(1) serves any rate.
class MixtureNullStore {
 public:
  explicit MixtureNullStore(MixtureNullOptions options = {});

  /// Ascending null statistics for size n.
  std::shared_ptr<const std::vector<double>> get(std::size_t n);

  const MixtureNullOptions& options() const noexcept { return options_; }

 private:
  MixtureNullOptions options_;
  std::mutex mutex_;
  std::map<std::size_t, std::shared_future<std::shared_ptr<const std::vector<double>>>> nulls_;
};

struct MixtureLrtResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double exponential_loglik = 0.0;
  std::size_t replicates = 0;
};

/// p = (1 + #{null >= observed}) / (R + 1).
MixtureLrtResult mixture_lrt(const OrderedSample& sample, const MixtureFit& fit, MixtureNullStore& nulls);

}  // namespace tailtest
