#pragma once

// Reference truncation policies: fixed cutoffs learned globally or per
// neighbourhood, the label-aware oracle, isotonic calibration of raw scores
// and a single global raw-score threshold. Every argmax tie resolves to the
// smallest cutoff or threshold.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "evtcut/metrics.hpp"
#include "evtcut/ranked_list.hpp"
#include "evtcut/truncation.hpp"

namespace evtcut::baselines {

// Test query id -> ids of the training queries forming its neighbourhood.
using NeighborhoodMap = std::map<std::string, std::vector<std::string>>;

struct CutoffChoice {
  std::size_t k = 0;
  double value = 0.0;
};

// Best fixed k over 0..max list length by mean metric; lists shorter than k
// are returned whole. Throws ConfigError on an empty training set.
std::size_t global_k_fit(std::span<const RankedList> train, metrics::Metric metric);

// Same objective restricted to one query's neighbourhood.
std::size_t local_k(std::span<const RankedList> neighbors, metrics::Metric metric);

// Exact best prefix for a labeled list.
CutoffChoice oracle_cutoff(const RankedList& list, metrics::Metric metric);

// Resolves the neighbourhood of `query_id` against the training set. Throws
// ConfigError when the query has no entry or references an unknown or
// unlabeled training query.
std::vector<RankedList> gather_neighbors(const NeighborhoodMap& map, const std::string& query_id,
                                         std::span<const RankedList> train);

// Weighted least-squares nondecreasing fit (pool adjacent violators).
std::vector<double> pava(std::span<const double> values, std::span<const double> weights = {});

struct ScorePoint {
  double score = 0.0;
  double target = 0.0;
};

struct IsotonicModel {
  std::vector<double> breakpoints;  // ascending raw scores
  std::vector<double> values;       // nondecreasing fitted values in [0, 1]
  double decision_threshold = 0.5;

  // Linear between knots, clamped to the end values outside them.
  double fitted(double score) const;
};

// Isotonic curve through (score, target) points; points sharing a score are
// pooled first. decision_threshold is left at its default. Throws
// ConfigError on empty input.
IsotonicModel isotonic_regression(std::span<const ScorePoint> points);

// Fits the curve on every (score, label) of the neighbourhood (+1 -> 1,
// -1 -> 0) and picks the decision threshold from {-1} and the distinct
// fitted values by mean metric over the same lists.
IsotonicModel isotonic_fit(std::span<const RankedList> neighbors, metrics::Metric metric);

// Keeps results whose fitted value exceeds the model's threshold.
truncation::TruncationDecision isotonic_apply(const IsotonicModel& model, const RankedList& list);

// Single raw-score threshold shared by all queries: results with score > tau
// are kept. Candidates are every distinct training score and -infinity.
struct RawThreshold {
  double tau = 0.0;
  double mean_metric = 0.0;
};
RawThreshold raw_threshold_fit(std::span<const RankedList> train, metrics::Metric metric);
truncation::TruncationDecision raw_threshold_apply(double tau, const RankedList& list);

}  // namespace evtcut::baselines
