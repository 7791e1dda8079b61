#include "evtcut/evt.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "evtcut/errors.hpp"

namespace evtcut::evt {

namespace {

constexpr std::size_t kGridPoints = 200;
constexpr double kThetaLo = 1e-9;  // relative to 1/mean(x)
constexpr double kThetaHi = 1e6;
constexpr double kGoldenTol = 1e-10;

void require_nonnegative(double x) {
  if (!(x >= 0.0)) {
    throw DomainError("GPD evaluated at negative or NaN excess " + std::to_string(x));
  }
}

struct Profile {
  double theta = 0.0;
  double c = 0.0;
  double alpha = 0.0;
  double log_likelihood = -std::numeric_limits<double>::infinity();
};

// Profile likelihood at theta > 0.
Profile profile_at(std::span<const double> x, double theta) {
  const double m = static_cast<double>(x.size());
  double s = 0.0;
  for (double v : x) s += std::log1p(theta * v);
  Profile p;
  p.theta = theta;
  if (!(s > 0.0)) return p;  // underflow: indistinguishable from theta = 0
  p.c = -s / m;
  p.alpha = s / (m * theta);
  p.log_likelihood = -m * std::log(p.alpha) + m * (p.c - 1.0);
  return p;
}

// d l / d log(theta) divided by m. Zero at an interior maximum of the
// profile; positive to its left.
double profile_slope(std::span<const double> x, double theta) {
  double s = 0.0;
  double r = 0.0;
  for (double v : x) {
    s += std::log1p(theta * v);
    r += theta * v / (1.0 + theta * v);
  }
  const double m = static_cast<double>(x.size());
  const double c = -s / m;
  return 1.0 - (1.0 - 1.0 / c) * (r / m);
}

}  // namespace

void validate(const GpdParams& params) {
  if (!std::isfinite(params.c) || !std::isfinite(params.alpha) || params.c > 0.0 ||
      params.alpha <= 0.0) {
    throw ParameterError("invalid GPD parameters c=" + std::to_string(params.c) +
                         " alpha=" + std::to_string(params.alpha) +
                         " (need c <= 0, alpha > 0)");
  }
}

ExcessSample::ExcessSample(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw ContractError("excess sample entries must be finite and >= 0");
    }
    if (i > 0 && values_[i] < values_[i - 1]) {
      throw ContractError("excess sample must be sorted ascending");
    }
  }
}

ExcessSample ExcessSample::from_unsorted(std::vector<double> values) {
  std::stable_sort(values.begin(), values.end());
  return ExcessSample(std::move(values));
}

double ExcessSample::mean() const noexcept {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         static_cast<double>(values_.size());
}

bool ExcessSample::all_zero() const noexcept {
  // Sorted and non-negative, so the largest value decides.
  return values_.empty() || values_.back() == 0.0;
}

double gpd_cdf(const GpdParams& params, double x) {
  validate(params);
  require_nonnegative(x);
  if (std::isinf(x)) return 1.0;
  if (params.c == 0.0) return -std::expm1(-x / params.alpha);
  return -std::expm1(std::log1p(-params.c * x / params.alpha) / params.c);
}

double gpd_log_pdf(const GpdParams& params, double x) {
  validate(params);
  require_nonnegative(x);
  if (params.c == 0.0) return -std::log(params.alpha) - x / params.alpha;
  return -std::log(params.alpha) +
         (1.0 / params.c - 1.0) * std::log1p(-params.c * x / params.alpha);
}

double gpd_neg_log_survival(const GpdParams& params, double x) {
  validate(params);
  require_nonnegative(x);
  if (params.c == 0.0) return x / params.alpha;
  return -std::log1p(-params.c * x / params.alpha) / params.c;
}

double gpd_log_likelihood(const GpdParams& params, const ExcessSample& sample) {
  double total = 0.0;
  for (double x : sample.values()) total += gpd_log_pdf(params, x);
  return total;
}

GpdParams fit_gpd_mle(const ExcessSample& sample, const FitOptions& options) {
  const std::size_t m = sample.size();
  if (m < std::max<std::size_t>(options.min_samples, 1)) {
    throw InsufficientDataError("GPD fit needs at least " +
                                std::to_string(options.min_samples) + " samples, got " +
                                std::to_string(m));
  }
  if (sample.all_zero()) {
    throw DegenerateSampleError("GPD fit on a sample whose excesses are all zero");
  }

  const auto x = sample.values();
  const double mean = sample.mean();
  const double md = static_cast<double>(m);

  Profile best;
  best.theta = 0.0;
  best.c = 0.0;
  best.alpha = mean;
  best.log_likelihood = -md * std::log(mean) - md;

  // Work in log(theta) so the bracket is scale free.
  const double lo = std::log(kThetaLo / mean);
  const double hi = std::log(kThetaHi / mean);
  const double step = (hi - lo) / static_cast<double>(kGridPoints - 1);

  std::size_t best_k = 0;
  Profile grid_best;
  for (std::size_t k = 0; k < kGridPoints; ++k) {
    const Profile p = profile_at(x, std::exp(lo + step * static_cast<double>(k)));
    if (p.log_likelihood > grid_best.log_likelihood) {
      grid_best = p;
      best_k = k;
    }
  }

  if (std::isfinite(grid_best.log_likelihood)) {
    double a = lo + step * static_cast<double>(best_k == 0 ? 0 : best_k - 1);
    double b = lo + step * static_cast<double>(std::min(best_k + 1, kGridPoints - 1));
    const double bracket_lo = a;
    const double bracket_hi = b;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double u1 = b - inv_phi * (b - a);
    double u2 = a + inv_phi * (b - a);
    Profile p1 = profile_at(x, std::exp(u1));
    Profile p2 = profile_at(x, std::exp(u2));
    while (b - a > kGoldenTol) {
      if (p1.log_likelihood >= p2.log_likelihood) {
        b = u2;
        u2 = u1;
        p2 = p1;
        u1 = b - inv_phi * (b - a);
        p1 = profile_at(x, std::exp(u1));
      } else {
        a = u1;
        u1 = u2;
        p1 = p2;
        u2 = a + inv_phi * (b - a);
        p2 = profile_at(x, std::exp(u2));
      }
    }
    for (const Profile& p : {grid_best, p1, p2}) {
      if (p.log_likelihood > best.log_likelihood) best = p;
    }

    // Golden section only resolves the flat top to about sqrt(eps); finish on
    // the score equation so the fit is reproducible to rounding.
    const auto slope = [&](double t) { return profile_slope(x, std::exp(t)); };
    const double s_lo = slope(bracket_lo);
    const double s_hi = slope(bracket_hi);
    if (std::isfinite(s_lo) && std::isfinite(s_hi) && s_lo > 0.0 && s_hi < 0.0) {
      std::uintmax_t iterations = 200;
      const auto root = boost::math::tools::toms748_solve(
          slope, bracket_lo, bracket_hi, s_lo, s_hi, boost::math::tools::eps_tolerance<double>(),
          iterations);
      const double t = root.second - root.first <= kGoldenTol ? 0.5 * (root.first + root.second)
                                                             : std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(t)) {
        const Profile p = profile_at(x, std::exp(t));
        const double slack = 1e-12 * std::max(1.0, std::abs(best.log_likelihood));
        if (p.log_likelihood >= best.log_likelihood - slack) best = p;
      }
    }
  }

  GpdParams out{best.c, best.alpha};
  if (out.c > 0.0) out.c = 0.0;
  return out;
}

double cvm_at(const GpdParams& params, const ExcessSample& sample) {
  validate(params);
  const auto x = sample.values();
  if (x.empty()) throw InsufficientDataError("empty sample");
  const double m = static_cast<double>(x.size());
  double t = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = gpd_cdf(params, x[i]) - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * m);
    t += d * d;
  }
  return t + 1.0 / (12.0 * m);
}

CvmStatistic cvm_statistic(const ExcessSample& sample, const FitOptions& options) {
  const GpdParams fit = fit_gpd_mle(sample, options);
  return {cvm_at(fit, sample), sample.size(), fit};
}

}  // namespace evtcut::evt
