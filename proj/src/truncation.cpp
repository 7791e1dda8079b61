#include "evtcut/truncation.hpp"

#include <cmath>

#include "evtcut/errors.hpp"

namespace evtcut::truncation {

TruncationDecision truncate_at_threshold(std::span<const double> surprise, double tau,
                                         std::string query_id, std::string policy) {
  std::size_t k = 0;
  for (std::size_t r = 0; r < surprise.size(); ++r) {
    if (r > 0 && surprise[r] > surprise[r - 1]) {
      throw ContractError("surprise scores of query '" + query_id +
                          "' are not nonincreasing at rank " + std::to_string(r + 1));
    }
    if (surprise[r] > tau) k = r + 1;
  }
  return {std::move(query_id), k, tau, std::move(policy)};
}

std::vector<double> threshold_grid(const SweepOptions& options) {
  if (!(options.lo < options.hi) || !(options.step > 0.0) || !std::isfinite(options.hi)) {
    throw ConfigError("sweep needs lo < hi and step > 0");
  }
  const auto steps =
      static_cast<std::size_t>(std::floor((options.hi - options.lo) / options.step + 1e-9));
  std::vector<double> grid;
  grid.reserve(steps + 1);
  for (std::size_t s = 0; s <= steps; ++s) {
    grid.push_back(options.lo + static_cast<double>(s) * options.step);
  }
  return grid;
}

ThresholdSweepResult sweep_threshold(std::span<const RankedList> lists,
                                     std::span<const std::vector<double>> surprise,
                                     metrics::Metric metric, const SweepOptions& options) {
  if (lists.empty()) throw ConfigError("threshold sweep over an empty training set");
  if (lists.size() != surprise.size()) {
    throw ContractError("sweep needs one surprise vector per training list");
  }
  for (std::size_t q = 0; q < lists.size(); ++q) {
    if (!lists[q].labels) {
      throw ContractError("training query " + lists[q].query_id + " is unlabeled");
    }
    if (surprise[q].size() != lists[q].size()) {
      throw ContractError("surprise length mismatch for query " + lists[q].query_id);
    }
  }

  ThresholdSweepResult result;
  result.grid = threshold_grid(options);
  result.mean_metric.reserve(result.grid.size());
  const auto nq = static_cast<double>(lists.size());
  for (std::size_t g = 0; g < result.grid.size(); ++g) {
    double sum = 0.0;
    for (std::size_t q = 0; q < lists.size(); ++q) {
      const std::size_t k = truncate_at_threshold(surprise[q], result.grid[g]).k;
      sum += metrics::metric_at_k(lists[q], k, metric);
    }
    const double mean = sum / nq;
    result.mean_metric.push_back(mean);
    if (metrics::improves(mean, result.mean_metric[result.best_index])) result.best_index = g;
  }
  result.best_threshold = result.grid[result.best_index];
  return result;
}

double pvalue_from_surprise(double s) {
  if (!(s >= 0.0)) throw DomainError("surprise must be >= 0");
  return std::exp(-s);
}

double surprise_from_pvalue(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("p-value must lie in (0, 1]");
  return p == 1.0 ? 0.0 : -std::log(p);
}

}  // namespace evtcut::truncation
