#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>

#include "evtcut/data_io.hpp"
#include "evtcut/errors.hpp"
#include "json.hpp"

namespace evtcut::io {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class QueryRng {
 public:
  explicit QueryRng(std::uint64_t seed) : engine_(seed) {}

  // Open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Inverse-CDF draw from GPD(shape, scale), shape <= 0.
  double gpd(double shape, double scale) {
    const double e = -std::log(uniform());
    return gpd_quantile_from_exp(e, shape, scale);
  }

  static double gpd_quantile_from_exp(double e, double shape, double scale) {
    if (shape == 0.0) return scale * e;
    return scale * std::expm1(-shape * e) / -shape;
  }

  std::size_t uniform_int(std::size_t lo, std::size_t hi) {
    const auto span = static_cast<double>(hi - lo + 1);
    const auto k = static_cast<std::size_t>(std::floor(uniform() * span));
    return lo + std::min(k, hi - lo);
  }

 private:
  std::mt19937_64 engine_;
};

std::string query_name(const char* prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04zu", prefix, k);
  return buf;
}

struct Item {
  double score;
  bool relevant;
};

RankedList draw_query(const SyntheticConfig& cfg, std::uint64_t index, const std::string& qid,
                      QueryTruth& truth) {
  QueryRng rng(query_seed(cfg.seed, index));
  const double offset = cfg.offset_lo + (cfg.offset_hi - cfg.offset_lo) * rng.uniform();
  const std::size_t relevant = rng.uniform_int(cfg.relevant_min, cfg.relevant_max);
  if (cfg.list_length > cfg.background + relevant) {
    throw ConfigError("list length exceeds the number of indexed items for query " + qid);
  }

  std::vector<Item> items;
  items.reserve(cfg.background + relevant);
  for (std::size_t k = 0; k < cfg.background; ++k) {
    items.push_back({offset + rng.gpd(cfg.tail_shape, cfg.tail_scale), false});
  }
  const double floor_level = QueryRng::gpd_quantile_from_exp(
      std::log(static_cast<double>(cfg.background) / static_cast<double>(cfg.list_length)),
      cfg.tail_shape, cfg.tail_scale);
  for (std::size_t k = 0; k < relevant; ++k) {
    items.push_back({offset + floor_level + cfg.relevant_shift +
                         rng.gpd(cfg.tail_shape, cfg.tail_scale),
                     true});
  }

  const auto by_score = [](const Item& a, const Item& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.relevant && !b.relevant;
  };
  const auto keep = static_cast<std::ptrdiff_t>(cfg.list_length);
  std::partial_sort(items.begin(), items.begin() + keep, items.end(), by_score);

  RankedList list;
  list.query_id = qid;
  list.labels.emplace();
  for (std::ptrdiff_t r = 0; r < keep; ++r) {
    char id[32];
    std::snprintf(id, sizeof id, "d%06td", r + 1);
    list.result_ids.emplace_back(id);
    list.scores.push_back(items[r].score);
    list.labels->push_back(items[r].relevant ? 1 : -1);
  }
  list.total_relevant = relevant;

  truth.query_id = qid;
  truth.offset = offset;
  truth.total_relevant = relevant;
  truth.relevant_retrieved =
      static_cast<std::size_t>(std::count(list.labels->begin(), list.labels->end(), 1));
  return list;
}

}  // namespace

std::uint64_t query_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

void validate(const SyntheticConfig& cfg) {
  if (cfg.num_train == 0 && cfg.num_test == 0) throw ConfigError("no queries requested");
  if (cfg.list_length == 0) throw ConfigError("list length must be positive");
  if (cfg.background == 0) throw ConfigError("background population must be positive");
  if (cfg.relevant_min > cfg.relevant_max) throw ConfigError("relevant-min exceeds relevant-max");
  if (cfg.list_length > cfg.background + cfg.relevant_min) {
    throw ConfigError("list length exceeds background + relevant-min");
  }
  if (!(cfg.offset_lo <= cfg.offset_hi)) throw ConfigError("offset range is empty");
  if (!(cfg.tail_shape <= 0.0)) throw ConfigError("tail shape must be <= 0");
  if (!(cfg.tail_scale > 0.0)) throw ConfigError("tail scale must be positive");
  if (!(cfg.relevant_shift > 0.0)) throw ConfigError("relevant shift must be positive");
  if (cfg.num_test > 0 && cfg.neighbors > cfg.num_train) {
    throw ConfigError("more neighbours requested than training queries");
  }
}

SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
  validate(cfg);
  SyntheticDataset data;
  const std::size_t total = cfg.num_train + cfg.num_test;
  data.truth.resize(total);
  for (std::size_t g = 0; g < total; ++g) {
    const bool train = g < cfg.num_train;
    const std::size_t local = train ? g : g - cfg.num_train;
    QueryTruth& truth = data.truth[g];
    truth.split = train ? "train" : "test";
    RankedList list = draw_query(cfg, g, query_name(train ? "train" : "test", local), truth);
    (train ? data.train : data.test).push_back(std::move(list));
  }

  if (cfg.neighbors > 0) {
    for (std::size_t t = 0; t < cfg.num_test; ++t) {
      const double mu = data.truth[cfg.num_train + t].offset;
      std::vector<std::size_t> idx(cfg.num_train);
      std::iota(idx.begin(), idx.end(), 0);
      const auto dist = [&](std::size_t k) { return std::abs(data.truth[k].offset - mu); };
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
      auto& out = data.neighborhoods[data.test[t].query_id];
      for (std::size_t k = 0; k < cfg.neighbors; ++k) out.push_back(data.train[idx[k]].query_id);
    }
  }
  return data;
}

void write_truth(std::ostream& out, std::span<const QueryTruth> truth) {
  for (const QueryTruth& t : truth) {
    nlohmann::ordered_json j;
    j["query_id"] = t.query_id;
    j["split"] = t.split;
    j["offset"] = t.offset;
    j["total_relevant"] = t.total_relevant;
    j["relevant_retrieved"] = t.relevant_retrieved;
    out << j.dump() << '\n';
  }
}

}  // namespace evtcut::io
