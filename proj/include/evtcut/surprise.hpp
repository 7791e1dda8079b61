#pragma once

// Surprise rescoring of a single ranked list.
//
// The non-relevant bulk of a result list is modelled as the conditional
// excess of some background distribution above a threshold u, fitted with a
// GPD. Each result is rescored as -log P(excess >= s - u) under that fit,
// i.e. the negative log p-value of the null "this result is non-relevant".
//
// The fit window is chosen greedily on the ascending score list: first the
// largest scores (suspected relevant tail) are dropped one at a time while
// the Cramer-von Mises statistic keeps strictly decreasing, then the
// smallest scores are dropped under the same rule to pick u.

#include <cstddef>
#include <span>
#include <vector>

#include "evtcut/evt.hpp"
#include "evtcut/ranked_list.hpp"

namespace evtcut::surprise {

struct SurpriseOptions {
  // Smallest window the greedy loops may shrink to; also the GPD fit floor.
  std::size_t min_window = 10;
  // Each side may drop at most ceil(trim_cap * n) scores.
  double trim_cap = 0.5;
  // Fit on every score from u upwards (scores[i:]) instead of the selected
  // window scores[i:j]. Off by default.
  bool fit_full_tail = false;
  // A greedy step is accepted only if it lowers W^2 by more than this.
  double min_improvement = 1e-12;
};

// Indices into the ascending score list: [i, j) is the fit window.
struct FitWindow {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t n = 0;
};

struct CvmStep {
  FitWindow window;
  evt::CvmStatistic stat;
  bool accepted = false;
};

struct WindowSearch {
  FitWindow window;
  // Every statistic evaluated, in order. trace[0] is the full list.
  std::vector<CvmStep> trace;
};

struct SurpriseResult {
  // Aligned with the input order.
  std::vector<double> surprise;
  FitWindow window;
  double u = 0.0;
  evt::GpdParams gpd;
  std::vector<CvmStep> cvm_trace;
};

// -log(1 - G(s - u)) for s >= u, else 0.
double surprise_value(const evt::GpdParams& gpd, double u, double s);

// Greedy two-sided window search on an ascending score list.
// Throws InsufficientDataError when fewer than min_window scores are given.
WindowSearch select_fit_window(std::span<const double> scores_ascending,
                               const SurpriseOptions& options = {});

// Rescores scores given in any order; the result is aligned with the input.
SurpriseResult surprise_rescore(std::span<const double> scores,
                                const SurpriseOptions& options = {});

// Validates the list, then rescores it. Labels are ignored.
SurpriseResult surprise_rescore(const RankedList& list, const SurpriseOptions& options = {});

}  // namespace evtcut::surprise
