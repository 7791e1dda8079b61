#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace evtcut {

// One query's result list, best result first. Scores are oriented so that
// higher means more relevant; distance-like scores are negated on ingestion.
struct RankedList {
  std::string query_id;
  std::vector<std::string> result_ids;
  std::vector<double> scores;
  // Binary judgments aligned with result_ids: +1 relevant, -1 not.
  std::optional<std::vector<int>> labels;
  // Number of relevant items for the query, including unretrieved ones.
  // When absent, the count of +1 labels is used.
  std::optional<std::size_t> total_relevant;

  std::size_t size() const noexcept { return scores.size(); }
  bool labeled() const noexcept { return labels.has_value(); }
};

// Throws ContractError if lengths disagree, scores are not finite and
// nonincreasing, labels are not +/-1, or total_relevant undercounts labels.
void validate(const RankedList& list);

// total_relevant if set, else the number of +1 labels. Requires labels.
std::size_t relevant_count(const RankedList& list);

}  // namespace evtcut
