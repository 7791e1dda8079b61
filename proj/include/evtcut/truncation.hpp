#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evtcut/metrics.hpp"
#include "evtcut/ranked_list.hpp"

namespace evtcut::truncation {

struct TruncationDecision {
  std::string query_id;
  std::size_t k = 0;  // results 1..k are returned
  double threshold = 0.0;
  std::string policy;
};

// Keeps the prefix whose surprise is strictly above tau. Throws
// ContractError if `surprise` is not nonincreasing.
TruncationDecision truncate_at_threshold(std::span<const double> surprise, double tau,
                                         std::string query_id = {},
                                         std::string policy = "surprise");

struct SweepOptions {
  double lo = 0.0;
  double hi = 8.0;
  double step = 0.05;
};

struct ThresholdSweepResult {
  std::vector<double> grid;
  std::vector<double> mean_metric;
  std::size_t best_index = 0;
  double best_threshold = 0.0;
};

// Thresholds lo, lo + step, ... up to hi (inclusive within 1e-9 steps).
std::vector<double> threshold_grid(const SweepOptions& options);

// Mean metric over labeled training lists for every grid threshold; the
// best threshold is the first (smallest) maximiser. `surprise[q]` holds the
// Surprise scores of `lists[q]` in list order.
ThresholdSweepResult sweep_threshold(std::span<const RankedList> lists,
                                     std::span<const std::vector<double>> surprise,
                                     metrics::Metric metric, const SweepOptions& options = {});

// exp(-s). Throws DomainError for s < 0 or NaN.
double pvalue_from_surprise(double s);
// -log(p). Throws DomainError unless 0 < p <= 1.
double surprise_from_pvalue(double p);

}  // namespace evtcut::truncation
