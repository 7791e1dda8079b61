#pragma once

// Truncation metrics over binary (+1/-1) judgments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evtcut/ranked_list.hpp"

namespace evtcut::metrics {

enum class Metric { kF1, kDcg, kAccuracy };

// True when `candidate` beats `incumbent` by more than rounding noise. Means
// that are equal in exact arithmetic but summed in a different order must
// fall to the tie rule, not to the last ulp.
inline bool improves(double candidate, double incumbent) {
  if (!std::isfinite(incumbent)) return candidate > incumbent;
  return candidate > incumbent + 1e-12 * std::max(1.0, std::abs(incumbent));
}

std::string_view metric_name(Metric metric);
// Accepts "f1", "dcg", "accuracy". Throws DomainError otherwise.
Metric parse_metric(std::string_view name);

// F1 of the top-k prefix. Recall is measured against total_relevant, which
// may exceed the relevant items present in the list. Zero when k = 0 or a
// denominator vanishes. Throws DomainError if k > labels.size().
double f1_at_k(std::span<const int> labels, std::size_t k, std::size_t total_relevant);

// Signed DCG: sum_{i<=k} rel_i / log2(i + 1) with rel_i in {+1, -1}.
double dcg_at_k(std::span<const int> labels, std::size_t k);

struct MatchDecision {
  std::size_t k = 0;
  bool has_match = false;
  // 1-based rank of the matching item in the list, if retrieved.
  std::optional<std::size_t> match_rank;
};

// A query is correct iff it has a match and the match rank is <= k, or it
// has none and k = 0.
bool match_correct(const MatchDecision& decision);
// Fraction of correct queries. Throws DomainError on an empty set.
double match_accuracy(std::span<const MatchDecision> decisions);

// Per-query value of `metric` when the list is cut after k results. For
// accuracy the value is 1 or 0; has_match is total relevance > 0 and the
// match is the first +1 label. Requires a labeled list.
double metric_at_k(const RankedList& list, std::size_t k, Metric metric);

struct EvalReport {
  std::string metric_name;
  std::vector<std::string> policies;
  std::vector<std::string> query_ids;
  // per_query[policy][q], aligned with query_ids.
  std::map<std::string, std::vector<double>> per_query;
  std::map<std::string, double> mean;

  std::size_t query_count() const noexcept { return query_ids.size(); }
};

// Records a policy's per-query values and their arithmetic mean. Throws
// ContractError if the value count does not match the report's queries.
void add_policy(EvalReport& report, const std::string& policy, std::vector<double> values);

}  // namespace evtcut::metrics
