#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "evtcut/baselines.hpp"
#include "evtcut/data_io.hpp"
#include "evtcut/errors.hpp"
#include "evtcut/pipeline.hpp"
#include "reference/oracles.hpp"

namespace bl = evtcut::baselines;
using evtcut::RankedList;
using evtcut::metrics::Metric;

namespace {

RankedList make_list(std::vector<int> labels, std::vector<double> scores = {},
                     std::optional<std::size_t> total = std::nullopt, std::string id = "q") {
  RankedList list;
  list.query_id = std::move(id);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    list.result_ids.push_back("d" + std::to_string(r));
    list.scores.push_back(scores.empty() ? -static_cast<double>(r) : scores[r]);
  }
  list.labels = std::move(labels);
  list.total_relevant = total;
  return list;
}

double brute_metric(const RankedList& list, std::size_t k, Metric metric) {
  const auto& l = *list.labels;
  std::size_t rel = 0;
  for (int v : l) rel += v == 1;
  if (metric == Metric::kF1) return oracle::f1(l, k, list.total_relevant.value_or(rel));
  return oracle::dcg(l, k);
}

std::size_t brute_best_k(const std::vector<RankedList>& lists, Metric metric) {
  std::size_t n_max = 0;
  for (const auto& l : lists) n_max = std::max(n_max, l.size());
  std::size_t best = 0;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= n_max; ++k) {
    double sum = 0.0;
    for (const auto& l : lists) sum += brute_metric(l, std::min(k, l.size()), metric);
    const double mean = sum / static_cast<double>(lists.size());
    if (mean > best_mean + 1e-12) {
      best_mean = mean;
      best = k;
    }
  }
  return best;
}

RankedList random_list(oracle::Rng& rng, std::size_t id) {
  const std::size_t n = 1 + rng.below(50);
  const double p = rng.uniform();
  std::vector<int> labels(n);
  std::size_t rel = 0;
  for (int& v : labels) {
    v = rng.uniform() < p ? 1 : -1;
    rel += v == 1;
  }
  return make_list(labels, {}, rel + rng.below(3), "q" + std::to_string(id));
}

}  // namespace

TEST(GlobalK, Examples) {
  EXPECT_EQ(bl::global_k_fit(std::vector<RankedList>{make_list({1, -1})}, Metric::kF1), 1u);
  EXPECT_EQ(bl::global_k_fit(std::vector<RankedList>{make_list({-1, -1}), make_list({-1})},
                             Metric::kDcg),
            0u);
  EXPECT_THROW(bl::global_k_fit(std::vector<RankedList>{}, Metric::kF1), evtcut::ConfigError);
}

TEST(GlobalK, MatchesBruteForce) {
  oracle::Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<RankedList> lists;
    const std::size_t q = 1 + rng.below(6);
    for (std::size_t i = 0; i < q; ++i) lists.push_back(random_list(rng, i));
    for (Metric m : {Metric::kF1, Metric::kDcg}) {
      EXPECT_EQ(bl::global_k_fit(lists, m), brute_best_k(lists, m));
      EXPECT_EQ(bl::local_k(lists, m), brute_best_k(lists, m));
    }
  }
}

TEST(LocalK, Examples) {
  EXPECT_EQ(bl::local_k(std::vector<RankedList>{make_list({1, 1, -1})}, Metric::kF1), 2u);
  EXPECT_EQ(bl::local_k(std::vector<RankedList>{make_list({1, -1}), make_list({-1, 1})},
                        Metric::kDcg),
            0u);
  EXPECT_THROW(bl::local_k(std::vector<RankedList>{}, Metric::kF1), evtcut::ConfigError);
  const auto self = make_list({-1, 1, 1, -1, 1, -1});
  for (Metric m : {Metric::kF1, Metric::kDcg}) {
    EXPECT_EQ(bl::local_k(std::vector<RankedList>{self}, m), bl::oracle_cutoff(self, m).k);
  }
}

TEST(OracleCutoff, Examples) {
  const auto a = bl::oracle_cutoff(make_list({1, 1, -1}), Metric::kDcg);
  EXPECT_EQ(a.k, 2u);
  EXPECT_NEAR(a.value, 1.6309297, 1e-6);
  const auto b = bl::oracle_cutoff(make_list({-1, -1, -1}), Metric::kF1);
  EXPECT_EQ(b.k, 0u);
  EXPECT_EQ(b.value, 0.0);
}

TEST(OracleCutoff, MatchesExhaustiveScan) {
  oracle::Rng rng(8);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<int> labels(20);
    for (int& v : labels) v = rng.uniform() < 0.4 ? 1 : -1;
    const auto list = make_list(labels);
    for (Metric m : {Metric::kF1, Metric::kDcg}) {
      std::size_t best = 0;
      double best_v = brute_metric(list, 0, m);
      for (std::size_t k = 1; k <= 20; ++k) {
        if (brute_metric(list, k, m) > best_v + 1e-12) {
          best_v = brute_metric(list, k, m);
          best = k;
        }
      }
      const auto got = bl::oracle_cutoff(list, m);
      EXPECT_EQ(got.k, best);
      EXPECT_NEAR(got.value, best_v, 1e-12);
    }
  }
}

TEST(Pava, MatchesExhaustivePartitions) {
  oracle::Rng rng(12);
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
      std::vector<double> y;
      for (std::size_t k = 0; k < n; ++k) y.push_back((bits >> k) & 1u);
      const auto got = bl::pava(y);
      const auto want = oracle::exhaustive_isotonic(y);
      for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
    }
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> y(n);
      for (double& v : y) v = std::round(rng.uniform() * 8.0) / 4.0;
      const auto got = bl::pava(y);
      const auto want = oracle::exhaustive_isotonic(y);
      for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(got[k], want[k], 1e-12);
      for (std::size_t k = 1; k < n; ++k) EXPECT_LE(got[k - 1], got[k]);
    }
  }
}

TEST(Pava, Weights) {
  const std::vector<double> y = {1.0, 0.0};
  const std::vector<double> w = {1.0, 3.0};
  const auto got = bl::pava(y, w);
  EXPECT_DOUBLE_EQ(got[0], 0.25);
  EXPECT_DOUBLE_EQ(got[1], 0.25);
}

TEST(IsotonicRegression, Examples) {
  const std::vector<bl::ScorePoint> mono = {{1, 0}, {2, 0}, {3, 1}};
  EXPECT_EQ(bl::isotonic_regression(mono).values, (std::vector<double>{0, 0, 1}));
  const std::vector<bl::ScorePoint> alt = {{1, 0}, {2, 1}, {3, 0}, {4, 1}};
  EXPECT_EQ(bl::isotonic_regression(alt).values, (std::vector<double>{0, 0.5, 0.5, 1}));
  const std::vector<bl::ScorePoint> flat = {{5, 1}, {1, 1}, {3, 1}};
  const auto m = bl::isotonic_regression(flat);
  EXPECT_EQ(m.values, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(m.breakpoints, (std::vector<double>{1, 3, 5}));
  EXPECT_THROW(bl::isotonic_regression(std::vector<bl::ScorePoint>{}), evtcut::ConfigError);
}

TEST(IsotonicRegression, TiedScoresPooled) {
  const std::vector<bl::ScorePoint> pts = {{1, 0}, {2, 1}, {2, 0}, {3, 1}};
  const auto m = bl::isotonic_regression(pts);
  EXPECT_EQ(m.breakpoints, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(m.values, (std::vector<double>{0, 0.5, 1}));
}

TEST(IsotonicApply, Examples) {
  bl::IsotonicModel model{{1, 2, 3}, {0, 0, 1}, 0.5};
  const auto list = make_list({1, -1, -1}, {3.5, 2.5, 1.5});
  EXPECT_EQ(model.fitted(3.5), 1.0);
  EXPECT_EQ(model.fitted(2.5), 0.5);
  EXPECT_EQ(model.fitted(1.5), 0.0);
  EXPECT_EQ(bl::isotonic_apply(model, list).k, 1u);
  model.decision_threshold = 1.0;
  EXPECT_EQ(bl::isotonic_apply(model, list).k, 0u);
  model.decision_threshold = -0.01;
  EXPECT_EQ(bl::isotonic_apply(model, list).k, 3u);
}

TEST(IsotonicFit, PicksBestThresholdOnNeighborhood) {
  const std::vector<RankedList> nbrs = {make_list({1, 1, -1, -1}, {4, 3, 2, 1}),
                                        make_list({1, -1, -1}, {3.5, 1.5, 0.5})};
  const auto model = bl::isotonic_fit(nbrs, Metric::kF1);
  for (const auto& l : nbrs) EXPECT_EQ(bl::isotonic_apply(model, l).k, bl::oracle_cutoff(l, Metric::kF1).k);
  EXPECT_THROW(bl::isotonic_fit(std::vector<RankedList>{}, Metric::kF1), evtcut::ConfigError);
}

TEST(RawThreshold, MatchesBruteForce) {
  oracle::Rng rng(44);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<RankedList> lists;
    std::set<double> cands = {-std::numeric_limits<double>::infinity()};
    for (std::size_t q = 0; q < 4; ++q) {
      const std::size_t n = 1 + rng.below(12);
      std::vector<double> s(n);
      for (double& v : s) v = std::round(rng.uniform() * 20.0) / 2.0;
      std::sort(s.begin(), s.end(), std::greater<>());
      std::vector<int> labels(n);
      for (std::size_t r = 0; r < n; ++r) labels[r] = rng.uniform() < 0.5 ? 1 : -1;
      cands.insert(s.begin(), s.end());
      lists.push_back(make_list(labels, s, std::nullopt, "q" + std::to_string(q)));
    }
    double best_tau = 0.0, best_mean = -1e300;
    for (double tau : cands) {
      double sum = 0.0;
      for (const auto& l : lists) {
        std::size_t k = 0;
        while (k < l.size() && l.scores[k] > tau) ++k;
        sum += brute_metric(l, k, Metric::kDcg);
      }
      if (sum / 4.0 > best_mean + 1e-12) {
        best_mean = sum / 4.0;
        best_tau = tau;
      }
    }
    const auto got = bl::raw_threshold_fit(lists, Metric::kDcg);
    EXPECT_EQ(got.tau, best_tau);
    EXPECT_NEAR(got.mean_metric, best_mean, 1e-12);
  }
}

TEST(GatherNeighbors, Errors) {
  const std::vector<RankedList> train = {make_list({1}, {}, std::nullopt, "t0")};
  bl::NeighborhoodMap map = {{"x", {"t0"}}, {"y", {"missing"}}};
  EXPECT_EQ(bl::gather_neighbors(map, "x", train).size(), 1u);
  EXPECT_THROW(bl::gather_neighbors(map, "y", train), evtcut::ConfigError);
  EXPECT_THROW(bl::gather_neighbors(map, "z", train), evtcut::ConfigError);
}

TEST(Policies, OracleDominatesAndPrefixDecisions) {
  evtcut::io::SyntheticConfig cfg;
  cfg.num_train = 30;
  cfg.num_test = 20;
  cfg.background = 20000;
  cfg.neighbors = 5;
  cfg.seed = 3;
  const auto data = evtcut::io::generate_synthetic(cfg);
  for (Metric m : {Metric::kF1, Metric::kDcg}) {
    evtcut::pipeline::BenchmarkOptions opt;
    opt.metric = m;
    const auto res = evtcut::pipeline::run_benchmark(data.train, data.test, &data.neighborhoods, opt);
    const auto& oracle_row = res.report.per_query.at("oracle");
    for (const auto& [policy, values] : res.report.per_query) {
      for (std::size_t q = 0; q < values.size(); ++q) EXPECT_GE(oracle_row[q], values[q] - 1e-12);
      EXPECT_GE(res.report.mean.at("oracle"), res.report.mean.at(policy) - 1e-12);
    }
    for (const auto& [policy, decisions] : res.decisions) {
      for (std::size_t q = 0; q < decisions.size(); ++q) EXPECT_LE(decisions[q].k, data.test[q].size());
    }
  }
}
