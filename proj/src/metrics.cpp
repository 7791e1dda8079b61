#include "evtcut/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "evtcut/errors.hpp"

namespace evtcut::metrics {

namespace {

void check_cutoff(std::span<const int> labels, std::size_t k) {
  if (k > labels.size()) {
    throw DomainError("cutoff " + std::to_string(k) + " exceeds list length " +
                      std::to_string(labels.size()));
  }
}

}  // namespace

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kF1:
      return "f1";
    case Metric::kDcg:
      return "dcg";
    case Metric::kAccuracy:
      return "accuracy";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "f1") return Metric::kF1;
  if (name == "dcg") return Metric::kDcg;
  if (name == "accuracy") return Metric::kAccuracy;
  throw DomainError("unknown metric '" + std::string(name) + "' (expected f1, dcg, accuracy)");
}

double f1_at_k(std::span<const int> labels, std::size_t k, std::size_t total_relevant) {
  check_cutoff(labels, k);
  if (k == 0 || total_relevant == 0) return 0.0;
  const auto hits = static_cast<double>(std::count(labels.begin(), labels.begin() + k, 1));
  if (hits == 0.0) return 0.0;
  const double precision = hits / static_cast<double>(k);
  const double recall = hits / static_cast<double>(total_relevant);
  return 2.0 * precision * recall / (precision + recall);
}

double dcg_at_k(std::span<const int> labels, std::size_t k) {
  check_cutoff(labels, k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    total += static_cast<double>(labels[i]) / std::log2(static_cast<double>(i) + 2.0);
  }
  return total;
}

bool match_correct(const MatchDecision& d) {
  if (d.has_match) return d.match_rank.has_value() && *d.match_rank <= d.k;
  return d.k == 0;
}

double match_accuracy(std::span<const MatchDecision> decisions) {
  if (decisions.empty()) throw DomainError("accuracy over an empty decision set");
  const auto correct = std::count_if(decisions.begin(), decisions.end(), match_correct);
  return static_cast<double>(correct) / static_cast<double>(decisions.size());
}

double metric_at_k(const RankedList& list, std::size_t k, Metric metric) {
  if (!list.labels) throw ContractError("query " + list.query_id + " is unlabeled");
  const std::span<const int> labels(*list.labels);
  switch (metric) {
    case Metric::kF1:
      return f1_at_k(labels, k, relevant_count(list));
    case Metric::kDcg:
      return dcg_at_k(labels, k);
    case Metric::kAccuracy: {
      check_cutoff(labels, k);
      MatchDecision d;
      d.k = k;
      d.has_match = relevant_count(list) > 0;
      const auto it = std::find(labels.begin(), labels.end(), 1);
      if (it != labels.end()) d.match_rank = static_cast<std::size_t>(it - labels.begin()) + 1;
      return match_correct(d) ? 1.0 : 0.0;
    }
  }
  return 0.0;
}

void add_policy(EvalReport& report, const std::string& policy, std::vector<double> values) {
  if (values.size() != report.query_ids.size()) {
    throw ContractError("policy " + policy + " has " + std::to_string(values.size()) +
                        " values for " + std::to_string(report.query_ids.size()) + " queries");
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
  if (std::find(report.policies.begin(), report.policies.end(), policy) ==
      report.policies.end()) {
    report.policies.push_back(policy);
  }
  report.per_query[policy] = std::move(values);
  report.mean[policy] = mean;
}

}  // namespace evtcut::metrics
