#pragma once

// Batch helpers shared by the command-line tool and the benchmark harness:
// rescoring whole query sets and comparing truncation policies.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evtcut/baselines.hpp"
#include "evtcut/metrics.hpp"
#include "evtcut/surprise.hpp"
#include "evtcut/truncation.hpp"

namespace evtcut::pipeline {

struct RescoredQuery {
  // Empty when the list could not be fit; surprise is then all zero.
  std::optional<surprise::SurpriseResult> result;
  std::vector<double> surprise;
  std::string warning;
};

// Rescores each list independently, in input order. Lists that fail a fit
// precondition (too short, degenerate) are reported, not thrown.
std::vector<RescoredQuery> rescore_all(std::span<const RankedList> lists,
                                       const surprise::SurpriseOptions& options);

std::vector<std::vector<double>> surprise_vectors(std::span<const RescoredQuery> rescored);

inline const std::vector<std::string>& all_policies() {
  static const std::vector<std::string> kAll = {"oracle",        "global_k", "local_k",
                                                "isotonic",      "raw_threshold", "surprise"};
  return kAll;
}

struct BenchmarkOptions {
  metrics::Metric metric = metrics::Metric::kF1;
  truncation::SweepOptions sweep;
  surprise::SurpriseOptions surprise;
  std::vector<std::string> policies = all_policies();
};

struct BenchmarkResult {
  metrics::EvalReport report;
  std::map<std::string, std::vector<truncation::TruncationDecision>> decisions;
  truncation::ThresholdSweepResult train_sweep;
  std::size_t global_k = 0;
  double raw_threshold = 0.0;
};

// Fits every requested policy on `train` and evaluates it on `test`.
// Local policies (local_k, isotonic) need `neighborhoods`; ConfigError is
// thrown when they are requested without one or a policy name is unknown.
BenchmarkResult run_benchmark(std::span<const RankedList> train, std::span<const RankedList> test,
                              const baselines::NeighborhoodMap* neighborhoods,
                              const BenchmarkOptions& options);

}  // namespace evtcut::pipeline
