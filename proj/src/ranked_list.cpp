#include "evtcut/ranked_list.hpp"

#include <algorithm>
#include <cmath>

#include "evtcut/errors.hpp"

namespace evtcut {

void validate(const RankedList& list) {
  const std::size_t n = list.scores.size();
  if (list.result_ids.size() != n) {
    throw ContractError("query " + list.query_id + ": result_ids and scores differ in length");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(list.scores[k])) {
      throw ContractError("query " + list.query_id + ": non-finite score");
    }
    if (k > 0 && list.scores[k] > list.scores[k - 1]) {
      throw ContractError("query " + list.query_id + ": scores must be nonincreasing");
    }
  }
  if (list.labels) {
    if (list.labels->size() != n) {
      throw ContractError("query " + list.query_id + ": labels and scores differ in length");
    }
    for (int l : *list.labels) {
      if (l != 1 && l != -1) {
        throw ContractError("query " + list.query_id + ": labels must be +1 or -1");
      }
    }
    if (list.total_relevant) {
      const auto hits =
          static_cast<std::size_t>(std::count(list.labels->begin(), list.labels->end(), 1));
      if (*list.total_relevant < hits) {
        throw ContractError("query " + list.query_id +
                            ": total_relevant is smaller than the number of +1 labels");
      }
    }
  }
}

std::size_t relevant_count(const RankedList& list) {
  if (!list.labels) throw ContractError("query " + list.query_id + " is unlabeled");
  if (list.total_relevant) return *list.total_relevant;
  return static_cast<std::size_t>(std::count(list.labels->begin(), list.labels->end(), 1));
}

}  // namespace evtcut
