#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "evtcut/data_io.hpp"
#include "evtcut/errors.hpp"
#include "evtcut/pipeline.hpp"
#include "evtcut/truncation.hpp"
#include "reference/oracles.hpp"

namespace tr = evtcut::truncation;
using evtcut::RankedList;
using evtcut::metrics::Metric;

namespace {

RankedList labeled(std::vector<int> labels) {
  RankedList list;
  list.query_id = "q";
  for (std::size_t r = 0; r < labels.size(); ++r) {
    list.result_ids.push_back("d" + std::to_string(r));
    list.scores.push_back(-static_cast<double>(r));
  }
  list.labels = std::move(labels);
  return list;
}

}  // namespace

TEST(TruncateAtThreshold, Examples) {
  const std::vector<double> s = {5.1, 2.0, 0.3, 0.0};
  EXPECT_EQ(tr::truncate_at_threshold(s, 2.3).k, 1u);
  EXPECT_EQ(tr::truncate_at_threshold(s, 0.0).k, 3u);
  EXPECT_EQ(tr::truncate_at_threshold(s, 5.1).k, 0u);
  EXPECT_EQ(tr::truncate_at_threshold(s, 9.0).k, 0u);
  EXPECT_EQ(tr::truncate_at_threshold(s, -1.0).k, 4u);
  const auto d = tr::truncate_at_threshold(s, 2.0, "q7", "p");
  EXPECT_EQ(d.query_id, "q7");
  EXPECT_EQ(d.policy, "p");
  EXPECT_EQ(d.threshold, 2.0);
  EXPECT_EQ(d.k, 1u);
}

TEST(TruncateAtThreshold, RejectsNonMonotone) {
  const std::vector<double> s = {1.0, 2.0, 0.0};
  EXPECT_THROW(tr::truncate_at_threshold(s, 0.5), evtcut::ContractError);
}

TEST(TruncateAtThreshold, MonotoneInTau) {
  oracle::Rng rng(2);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> s(30);
    for (double& v : s) v = rng.exponential(3.0);
    std::sort(s.begin(), s.end(), std::greater<>());
    std::size_t prev = s.size();
    for (double tau = 0.0; tau < 20.0; tau += 0.1) {
      const std::size_t k = tr::truncate_at_threshold(s, tau).k;
      EXPECT_LE(k, prev);
      for (std::size_t r = 0; r < s.size(); ++r) EXPECT_EQ(r < k, s[r] > tau);
      prev = k;
    }
  }
}

TEST(ThresholdGrid, DefaultRange) {
  const auto g = tr::threshold_grid({});
  ASSERT_EQ(g.size(), 161u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 8.0, 1e-12);
}

TEST(SweepThreshold, SingleQueryByHand) {
  const std::vector<RankedList> lists = {labeled({+1, -1, -1})};
  const std::vector<std::vector<double>> s = {{3.0, 1.0, 0.0}};
  const auto res = tr::sweep_threshold(lists, s, Metric::kF1, {0.0, 4.0, 2.0});
  ASSERT_EQ(res.grid.size(), 3u);
  EXPECT_EQ(res.best_threshold, 2.0);
  EXPECT_EQ(res.mean_metric[1], 1.0);
}

TEST(SweepThreshold, AllNegativeGoesToEmptyLists) {
  const std::vector<RankedList> lists = {labeled({-1, -1, -1}), labeled({-1, -1})};
  const std::vector<std::vector<double>> s = {{3.2, 1.0, 0.0}, {0.7, 0.0}};
  const auto res = tr::sweep_threshold(lists, s, Metric::kDcg);
  EXPECT_EQ(res.best_index, 64u);  // 3.2 = 64 * 0.05
  for (std::size_t q = 0; q < lists.size(); ++q) {
    EXPECT_EQ(tr::truncate_at_threshold(s[q], res.best_threshold).k, 0u);
  }
  EXPECT_EQ(res.mean_metric[res.best_index], 0.0);
}

TEST(SweepThreshold, Errors) {
  const std::vector<RankedList> none;
  const std::vector<std::vector<double>> no_s;
  EXPECT_THROW(tr::sweep_threshold(none, no_s, Metric::kF1), evtcut::Error);
  RankedList unl = labeled({1});
  unl.labels.reset();
  const std::vector<RankedList> lists = {unl};
  const std::vector<std::vector<double>> s = {{1.0}};
  EXPECT_THROW(tr::sweep_threshold(lists, s, Metric::kF1), evtcut::Error);
  const std::vector<RankedList> ok = {labeled({1})};
  EXPECT_THROW(tr::sweep_threshold(ok, s, Metric::kF1, {1.0, 0.0, 0.1}), evtcut::Error);
  EXPECT_THROW(tr::sweep_threshold(ok, s, Metric::kF1, {0.0, 1.0, 0.0}), evtcut::Error);
}

TEST(SweepThreshold, SyntheticMatchesNestedLoop) {
  evtcut::io::SyntheticConfig cfg;
  cfg.num_train = 40;
  cfg.num_test = 1;
  cfg.background = 20000;
  cfg.seed = 5;
  const auto data = evtcut::io::generate_synthetic(cfg);
  const auto s = evtcut::pipeline::surprise_vectors(evtcut::pipeline::rescore_all(data.train, {}));
  const auto res = tr::sweep_threshold(data.train, s, Metric::kF1);

  std::size_t best = 0;
  double best_mean = -1.0;
  for (std::size_t g = 0; g < 161; ++g) {
    const double tau = 0.0 + 0.05 * static_cast<double>(g);
    double sum = 0.0;
    for (std::size_t q = 0; q < data.train.size(); ++q) {
      std::size_t k = 0;
      while (k < s[q].size() && s[q][k] > tau) ++k;
      sum += oracle::f1(*data.train[q].labels, k, *data.train[q].total_relevant);
    }
    const double mean = sum / static_cast<double>(data.train.size());
    EXPECT_NEAR(res.mean_metric[g], mean, 1e-12);
    if (mean > best_mean + 1e-12) {
      best_mean = mean;
      best = g;
    }
  }
  EXPECT_EQ(res.best_index, best);
  EXPECT_EQ(res.best_threshold, res.grid[best]);

  // Reported value equals the metric of the decisions it implies.
  double sum = 0.0;
  for (std::size_t q = 0; q < data.train.size(); ++q) {
    const auto d = tr::truncate_at_threshold(s[q], res.best_threshold);
    sum += evtcut::metrics::metric_at_k(data.train[q], d.k, Metric::kF1);
  }
  EXPECT_EQ(res.mean_metric[res.best_index], sum / static_cast<double>(data.train.size()));
}

TEST(PValue, Mapping) {
  EXPECT_EQ(tr::pvalue_from_surprise(0.0), 1.0);
  EXPECT_NEAR(tr::pvalue_from_surprise(2.302585), 0.1, 1e-6);
  EXPECT_NEAR(tr::pvalue_from_surprise(4.605170), 0.01, 1e-6);
  EXPECT_EQ(tr::surprise_from_pvalue(1.0), 0.0);
  EXPECT_FALSE(std::signbit(tr::surprise_from_pvalue(1.0)));
  EXPECT_NEAR(tr::surprise_from_pvalue(0.1), 2.302585, 1e-6);
  EXPECT_NEAR(tr::surprise_from_pvalue(std::exp(-5.0)), 5.0, 1e-12);
  EXPECT_THROW(tr::pvalue_from_surprise(-0.1), evtcut::DomainError);
  EXPECT_THROW(tr::surprise_from_pvalue(0.0), evtcut::DomainError);
  EXPECT_THROW(tr::surprise_from_pvalue(1.5), evtcut::DomainError);
  EXPECT_THROW(tr::surprise_from_pvalue(std::nan("")), evtcut::DomainError);
}

TEST(PValue, RoundTrip) {
  for (double s = 0.0; s <= 50.0; s += 0.01) {
    EXPECT_NEAR(tr::surprise_from_pvalue(tr::pvalue_from_surprise(s)), s, 1e-12);
  }
}
