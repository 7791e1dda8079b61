#include "evtcut/surprise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "evtcut/errors.hpp"

namespace evtcut::surprise {

namespace {

std::vector<double> excesses(std::span<const double> asc, std::size_t i, std::size_t j) {
  std::vector<double> out;
  out.reserve(j - i);
  for (std::size_t k = i; k < j; ++k) out.push_back(asc[k] - asc[i]);
  return out;
}

evt::CvmStatistic window_cvm(std::span<const double> asc, std::size_t i, std::size_t j,
                             const evt::FitOptions& fit) {
  return evt::cvm_statistic(evt::ExcessSample(excesses(asc, i, j)), fit);
}

// Statistic of a candidate window, or nullopt when the window cannot be fit
// (e.g. it collapsed onto tied scores).
std::optional<evt::CvmStatistic> try_window_cvm(std::span<const double> asc, std::size_t i,
                                                std::size_t j, const evt::FitOptions& fit) {
  try {
    return window_cvm(asc, i, j, fit);
  } catch (const DegenerateSampleError&) {
    return std::nullopt;
  }
}

}  // namespace

double surprise_value(const evt::GpdParams& gpd, double u, double s) {
  evt::validate(gpd);
  if (!(s >= u)) return 0.0;
  return evt::gpd_neg_log_survival(gpd, s - u);
}

WindowSearch select_fit_window(std::span<const double> asc, const SurpriseOptions& options) {
  const std::size_t n = asc.size();
  const std::size_t floor = std::max<std::size_t>(options.min_window, 1);
  if (n < floor) {
    throw InsufficientDataError("window search needs at least " + std::to_string(floor) +
                                " scores, got " + std::to_string(n));
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (!(asc[k] >= asc[k - 1])) throw ContractError("scores must be sorted ascending");
  }
  const evt::FitOptions fit{floor};
  const auto cap = static_cast<std::size_t>(
      std::ceil(std::clamp(options.trim_cap, 0.0, 1.0) * static_cast<double>(n)));

  WindowSearch out;
  std::size_t i = 0;
  std::size_t j = n;
  evt::CvmStatistic current = window_cvm(asc, i, j, fit);
  out.trace.push_back({{i, j, n}, current, true});

  // Drop the largest scores.
  while (j - i > floor && n - j < cap) {
    const auto next = try_window_cvm(asc, i, j - 1, fit);
    if (!next) break;
    const bool accept = next->t < current.t - options.min_improvement;
    out.trace.push_back({{i, j - 1, n}, *next, accept});
    if (!accept) break;
    current = *next;
    --j;
  }

  // Then the smallest.
  while (j - i > floor && i < cap) {
    const auto next = try_window_cvm(asc, i + 1, j, fit);
    if (!next) break;
    const bool accept = next->t < current.t - options.min_improvement;
    out.trace.push_back({{i + 1, j, n}, *next, accept});
    if (!accept) break;
    current = *next;
    ++i;
  }

  out.window = {i, j, n};
  return out;
}

SurpriseResult surprise_rescore(std::span<const double> scores, const SurpriseOptions& options) {
  const std::size_t n = scores.size();
  for (double s : scores) {
    if (!std::isfinite(s)) throw ContractError("scores must be finite");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> asc(n);
  for (std::size_t k = 0; k < n; ++k) asc[k] = scores[order[k]];

  WindowSearch search = select_fit_window(asc, options);
  const FitWindow w = search.window;
  const std::size_t fit_end = options.fit_full_tail ? n : w.j;
  const evt::FitOptions fit{std::max<std::size_t>(options.min_window, 1)};

  SurpriseResult result;
  result.window = w;
  result.u = asc[w.i];
  result.gpd = evt::fit_gpd_mle(evt::ExcessSample(excesses(asc, w.i, fit_end)), fit);
  result.cvm_trace = std::move(search.trace);
  result.surprise.assign(n, 0.0);
  for (std::size_t k = w.i; k < n; ++k) {
    result.surprise[order[k]] = surprise_value(result.gpd, result.u, asc[k]);
  }
  return result;
}

SurpriseResult surprise_rescore(const RankedList& list, const SurpriseOptions& options) {
  validate(list);
  return surprise_rescore(std::span<const double>(list.scores), options);
}

}  // namespace evtcut::surprise
