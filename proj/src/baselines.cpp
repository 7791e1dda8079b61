#include "evtcut/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "evtcut/errors.hpp"

namespace evtcut::baselines {

namespace {

// table[k] = metric of the list cut after k results, k = 0..n.
std::vector<double> prefix_metrics(const RankedList& list, metrics::Metric metric) {
  std::vector<double> table(list.size() + 1);
  for (std::size_t k = 0; k <= list.size(); ++k) table[k] = metrics::metric_at_k(list, k, metric);
  return table;
}

std::size_t best_fixed_cutoff(std::span<const RankedList> lists, metrics::Metric metric) {
  std::size_t n_max = 0;
  std::vector<std::vector<double>> tables;
  tables.reserve(lists.size());
  for (const RankedList& list : lists) {
    tables.push_back(prefix_metrics(list, metric));
    n_max = std::max(n_max, list.size());
  }
  std::size_t best_k = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n_max; ++k) {
    double sum = 0.0;
    for (const auto& t : tables) sum += t[std::min(k, t.size() - 1)];
    const double mean = sum / static_cast<double>(tables.size());
    if (metrics::improves(mean, best)) {
      best = mean;
      best_k = k;
    }
  }
  return best_k;
}

std::size_t count_fitted_above(const IsotonicModel& model, const RankedList& list,
                               double threshold) {
  // Scores are nonincreasing and the curve nondecreasing, so kept results
  // form a prefix.
  std::size_t k = 0;
  while (k < list.size() && model.fitted(list.scores[k]) > threshold) ++k;
  return k;
}

}  // namespace

std::size_t global_k_fit(std::span<const RankedList> train, metrics::Metric metric) {
  if (train.empty()) throw ConfigError("global-k needs a nonempty training set");
  return best_fixed_cutoff(train, metric);
}

std::size_t local_k(std::span<const RankedList> neighbors, metrics::Metric metric) {
  if (neighbors.empty()) throw ConfigError("local-k needs a nonempty neighbourhood");
  return best_fixed_cutoff(neighbors, metric);
}

CutoffChoice oracle_cutoff(const RankedList& list, metrics::Metric metric) {
  CutoffChoice best{0, metrics::metric_at_k(list, 0, metric)};
  for (std::size_t k = 1; k <= list.size(); ++k) {
    const double v = metrics::metric_at_k(list, k, metric);
    if (metrics::improves(v, best.value)) best = {k, v};
  }
  return best;
}

std::vector<RankedList> gather_neighbors(const NeighborhoodMap& map, const std::string& query_id,
                                         std::span<const RankedList> train) {
  const auto it = map.find(query_id);
  if (it == map.end()) throw ConfigError("no neighbourhood for query " + query_id);
  std::map<std::string, const RankedList*> by_id;
  for (const RankedList& list : train) by_id.emplace(list.query_id, &list);
  std::vector<RankedList> out;
  out.reserve(it->second.size());
  for (const std::string& id : it->second) {
    const auto found = by_id.find(id);
    if (found == by_id.end()) {
      throw ConfigError("neighbourhood of " + query_id + " references unknown query " + id);
    }
    if (!found->second->labeled()) {
      throw ConfigError("neighbourhood of " + query_id + " references unlabeled query " + id);
    }
    out.push_back(*found->second);
  }
  return out;
}

std::vector<double> pava(std::span<const double> values, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != values.size()) {
    throw ContractError("pava: weights and values differ in length");
  }
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    Block b{values[i], weights.empty() ? 1.0 : weights[i], 1};
    while (!blocks.empty() && blocks.back().mean >= b.mean) {
      const Block& prev = blocks.back();
      const double w = prev.weight + b.weight;
      b = {(prev.mean * prev.weight + b.mean * b.weight) / w, w, prev.count + b.count};
      blocks.pop_back();
    }
    blocks.push_back(b);
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

double IsotonicModel::fitted(double score) const {
  if (breakpoints.empty()) return 0.0;
  if (score <= breakpoints.front()) return values.front();
  if (score >= breakpoints.back()) return values.back();
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(breakpoints.begin(), breakpoints.end(), score) - breakpoints.begin());
  const std::size_t lo = hi - 1;
  const double t = (score - breakpoints[lo]) / (breakpoints[hi] - breakpoints[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

IsotonicModel isotonic_regression(std::span<const ScorePoint> points) {
  if (points.empty()) throw ConfigError("isotonic regression on an empty point set");
  std::vector<ScorePoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ScorePoint& a, const ScorePoint& b) { return a.score < b.score; });

  IsotonicModel model;
  std::vector<double> means;
  std::vector<double> weights;
  for (std::size_t a = 0; a < sorted.size();) {
    std::size_t b = a;
    double sum = 0.0;
    while (b < sorted.size() && sorted[b].score == sorted[a].score) sum += sorted[b++].target;
    model.breakpoints.push_back(sorted[a].score);
    means.push_back(sum / static_cast<double>(b - a));
    weights.push_back(static_cast<double>(b - a));
    a = b;
  }
  model.values = pava(means, weights);
  return model;
}

IsotonicModel isotonic_fit(std::span<const RankedList> neighbors, metrics::Metric metric) {
  std::vector<ScorePoint> points;
  for (const RankedList& list : neighbors) {
    if (!list.labels) throw ContractError("isotonic fit on unlabeled query " + list.query_id);
    for (std::size_t r = 0; r < list.size(); ++r) {
      points.push_back({list.scores[r], (*list.labels)[r] > 0 ? 1.0 : 0.0});
    }
  }
  IsotonicModel model = isotonic_regression(points);

  std::vector<double> candidates = model.values;
  candidates.push_back(-1.0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  double best = -std::numeric_limits<double>::infinity();
  for (double threshold : candidates) {
    double sum = 0.0;
    for (const RankedList& list : neighbors) {
      sum += metrics::metric_at_k(list, count_fitted_above(model, list, threshold), metric);
    }
    const double mean = sum / static_cast<double>(neighbors.size());
    if (metrics::improves(mean, best)) {
      best = mean;
      model.decision_threshold = threshold;
    }
  }
  return model;
}

truncation::TruncationDecision isotonic_apply(const IsotonicModel& model, const RankedList& list) {
  return {list.query_id, count_fitted_above(model, list, model.decision_threshold),
          model.decision_threshold, "isotonic"};
}

RawThreshold raw_threshold_fit(std::span<const RankedList> train, metrics::Metric metric) {
  if (train.empty()) throw ConfigError("raw threshold fit needs a nonempty training set");
  std::vector<std::vector<double>> tables;
  tables.reserve(train.size());
  struct Entry {
    double score;
    std::size_t query;
  };
  std::vector<Entry> entries;
  for (std::size_t q = 0; q < train.size(); ++q) {
    tables.push_back(prefix_metrics(train[q], metric));
    for (double s : train[q].scores) entries.push_back({s, q});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.score > b.score; });

  std::vector<std::size_t> kept(train.size(), 0);
  const auto mean_now = [&] {
    double sum = 0.0;
    for (std::size_t q = 0; q < tables.size(); ++q) sum += tables[q][kept[q]];
    return sum / static_cast<double>(tables.size());
  };

  // Walk thresholds from high to low; >= keeps the smallest maximiser.
  RawThreshold best{std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
  for (std::size_t a = 0; a < entries.size();) {
    const double tau = entries[a].score;
    const double mean = mean_now();
    if (!metrics::improves(best.mean_metric, mean)) best = {tau, mean};
    while (a < entries.size() && entries[a].score == tau) ++kept[entries[a++].query];
  }
  const double all = mean_now();
  if (!metrics::improves(best.mean_metric, all)) best = {-std::numeric_limits<double>::infinity(), all};
  return best;
}

truncation::TruncationDecision raw_threshold_apply(double tau, const RankedList& list) {
  std::size_t k = 0;
  while (k < list.size() && list.scores[k] > tau) ++k;
  return {list.query_id, k, tau, "raw_threshold"};
}

}  // namespace evtcut::baselines
