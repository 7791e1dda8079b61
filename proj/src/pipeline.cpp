#include "evtcut/pipeline.hpp"

#include <algorithm>

#include "evtcut/errors.hpp"

namespace evtcut::pipeline {

std::vector<RescoredQuery> rescore_all(std::span<const RankedList> lists,
                                       const surprise::SurpriseOptions& options) {
  std::vector<RescoredQuery> out(lists.size());
  for (std::size_t q = 0; q < lists.size(); ++q) {
    try {
      out[q].result = surprise::surprise_rescore(lists[q], options);
      out[q].surprise = out[q].result->surprise;
    } catch (const InsufficientDataError& e) {
      out[q].surprise.assign(lists[q].size(), 0.0);
      out[q].warning = e.what();
    } catch (const DegenerateSampleError& e) {
      out[q].surprise.assign(lists[q].size(), 0.0);
      out[q].warning = e.what();
    }
  }
  return out;
}

std::vector<std::vector<double>> surprise_vectors(std::span<const RescoredQuery> rescored) {
  std::vector<std::vector<double>> out;
  out.reserve(rescored.size());
  for (const RescoredQuery& r : rescored) out.push_back(r.surprise);
  return out;
}

BenchmarkResult run_benchmark(std::span<const RankedList> train, std::span<const RankedList> test,
                              const baselines::NeighborhoodMap* neighborhoods,
                              const BenchmarkOptions& options) {
  if (train.empty() || test.empty()) throw ConfigError("benchmark needs train and test queries");
  for (const auto& p : options.policies) {
    if (std::find(all_policies().begin(), all_policies().end(), p) == all_policies().end()) {
      throw ConfigError("unknown policy '" + p + "'");
    }
    if ((p == "local_k" || p == "isotonic") && neighborhoods == nullptr) {
      throw ConfigError("policy " + p + " needs a neighbourhood map");
    }
  }
  for (const auto* set : {&train, &test}) {
    for (const RankedList& list : *set) {
      validate(list);
      if (!list.labeled()) throw ContractError("query " + list.query_id + " is unlabeled");
    }
  }

  BenchmarkResult res;
  res.report.metric_name = std::string(metrics::metric_name(options.metric));
  for (const RankedList& list : test) res.report.query_ids.push_back(list.query_id);

  const auto record = [&](const std::string& policy,
                          std::vector<truncation::TruncationDecision> decisions) {
    std::vector<double> values;
    values.reserve(test.size());
    for (std::size_t q = 0; q < test.size(); ++q) {
      values.push_back(metrics::metric_at_k(test[q], decisions[q].k, options.metric));
    }
    metrics::add_policy(res.report, policy, std::move(values));
    res.decisions[policy] = std::move(decisions);
  };

  for (const std::string& policy : options.policies) {
    std::vector<truncation::TruncationDecision> decisions;
    decisions.reserve(test.size());
    if (policy == "oracle") {
      for (const RankedList& list : test) {
        decisions.push_back({list.query_id, baselines::oracle_cutoff(list, options.metric).k, 0.0,
                             policy});
      }
    } else if (policy == "global_k") {
      res.global_k = baselines::global_k_fit(train, options.metric);
      for (const RankedList& list : test) {
        decisions.push_back({list.query_id, std::min(res.global_k, list.size()), 0.0, policy});
      }
    } else if (policy == "local_k") {
      for (const RankedList& list : test) {
        const auto nbrs = baselines::gather_neighbors(*neighborhoods, list.query_id, train);
        const std::size_t k = baselines::local_k(nbrs, options.metric);
        decisions.push_back({list.query_id, std::min(k, list.size()), 0.0, policy});
      }
    } else if (policy == "isotonic") {
      for (const RankedList& list : test) {
        const auto nbrs = baselines::gather_neighbors(*neighborhoods, list.query_id, train);
        decisions.push_back(
            baselines::isotonic_apply(baselines::isotonic_fit(nbrs, options.metric), list));
      }
    } else if (policy == "raw_threshold") {
      res.raw_threshold = baselines::raw_threshold_fit(train, options.metric).tau;
      for (const RankedList& list : test) {
        decisions.push_back(baselines::raw_threshold_apply(res.raw_threshold, list));
      }
    } else if (policy == "surprise") {
      const auto train_surprise = surprise_vectors(rescore_all(train, options.surprise));
      res.train_sweep =
          truncation::sweep_threshold(train, train_surprise, options.metric, options.sweep);
      const auto test_rescored = rescore_all(test, options.surprise);
      for (std::size_t q = 0; q < test.size(); ++q) {
        decisions.push_back(truncation::truncate_at_threshold(
            test_rescored[q].surprise, res.train_sweep.best_threshold, test[q].query_id, policy));
      }
    }
    record(policy, std::move(decisions));
  }
  return res;
}

}  // namespace evtcut::pipeline
