#pragma once

// Generalized Pareto distribution primitives used for peaks-over-threshold
// modelling of retrieval scores.
//
// Parametrisation: G(x) = 1 - (1 - c*x/alpha)^(1/c) for c != 0 and
// G(x) = 1 - exp(-x/alpha) for c = 0. Only the infinite-support half
// (c <= 0) is supported, which is the heavy-or-exponential-tailed family.

#include <cstddef>
#include <span>
#include <vector>

namespace evtcut::evt {

struct GpdParams {
  double c = 0.0;      // shape, c <= 0
  double alpha = 1.0;  // scale, alpha > 0
};

// Throws ParameterError unless c <= 0 and alpha > 0 (both finite).
void validate(const GpdParams& params);

// Ascending, non-negative excesses over a threshold.
class ExcessSample {
 public:
  // Requires `values` sorted nondecreasing with every entry finite and >= 0.
  // Throws ContractError otherwise.
  explicit ExcessSample(std::vector<double> values);

  // Sorts (stable) before validating.
  static ExcessSample from_unsorted(std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double mean() const noexcept;
  bool all_zero() const noexcept;

 private:
  std::vector<double> values_;
};

struct FitOptions {
  std::size_t min_samples = 10;
};

// Cramer-von Mises goodness of fit of a GPD fitted to a sample.
struct CvmStatistic {
  double t = 0.0;
  std::size_t m = 0;
  GpdParams fit;
};

double gpd_cdf(const GpdParams& params, double x);
double gpd_log_pdf(const GpdParams& params, double x);

// -log(1 - G(x)), evaluated without forming 1 - G(x).
double gpd_neg_log_survival(const GpdParams& params, double x);

double gpd_log_likelihood(const GpdParams& params, const ExcessSample& sample);

// Maximum-likelihood fit under the constraint c <= 0.
//
// The two-parameter problem is reduced to a one-dimensional profile in
// theta = -c/alpha >= 0. For fixed theta the likelihood is maximised by
//   c(theta) = -(1/m) sum log(1 + theta*x_i),   alpha(theta) = -c(theta)/theta,
// and theta = 0 is the exponential model with alpha = mean(x). theta is
// searched over {0} and [1e-9, 1e6]/mean(x), first on a log-spaced grid and
// then by golden-section refinement around the best grid point.
//
// Throws InsufficientDataError if sample.size() < options.min_samples and
// DegenerateSampleError if every value is zero.
GpdParams fit_gpd_mle(const ExcessSample& sample, const FitOptions& options = {});

// W^2 of the sample against fixed parameters.
double cvm_at(const GpdParams& params, const ExcessSample& sample);

// W^2 = sum_i (G(e_i) - (2i-1)/(2m))^2 + 1/(12m) at the sample's own MLE fit.
// Lower is a better fit. Propagates fit_gpd_mle errors.
CvmStatistic cvm_statistic(const ExcessSample& sample, const FitOptions& options = {});

}  // namespace evtcut::evt
