#pragma once

// Ingestion and serialisation of ranked lists: TREC run files, qrels, a
// JSONL interchange format, plus the seeded synthetic benchmark generator.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evtcut/baselines.hpp"
#include "evtcut/ranked_list.hpp"

namespace evtcut::io {

enum class Orientation { kHigherBetter, kLowerBetter };

// "higher" or "lower". Throws DomainError otherwise.
Orientation parse_orientation(std::string_view name);

// ---------------------------------------------------------------------------
// TREC run files: "qid Q0 docid rank score tag", whitespace separated.

struct TrecRunRecord {
  std::string qid;
  std::string docid;
  std::size_t rank = 0;
  double score = 0.0;
  std::string tag;
  std::size_t line = 0;  // source line, 0 if not parsed from text
};

// Field-level parsing only. Blank lines are skipped.
std::vector<TrecRunRecord> read_trec_records(std::istream& in);

// Groups records by qid (first-appearance order) and sorts each group by
// rank. Lower-better scores are negated. Rejects duplicate (qid, docid),
// repeated ranks, and score orders that contradict the ranks.
std::vector<RankedList> group_trec_run(std::span<const TrecRunRecord> records,
                                       Orientation orientation);

std::vector<RankedList> parse_trec_run(std::istream& in, Orientation orientation);

// One line per record; scores printed with 17 significant digits.
void write_trec_run(std::ostream& out, std::span<const TrecRunRecord> records);

// Lists back to run records with ranks 1..n, undoing the orientation.
std::vector<TrecRunRecord> to_trec_records(std::span<const RankedList> lists,
                                           Orientation orientation, const std::string& tag);

// ---------------------------------------------------------------------------
// qrels: "qid iter docid rel".

struct QrelRecord {
  std::string qid;
  std::string iteration;
  std::string docid;
  int rel = 0;
};

struct Qrels {
  std::vector<QrelRecord> records;
  // qid -> docid -> +1 / -1
  std::map<std::string, std::map<std::string, int>> judgments;
  // qid -> number of docs with rel > 0
  std::map<std::string, std::size_t> total_relevant;
};

Qrels parse_qrels(std::istream& in);

// Labels every result (+1 iff judged rel > 0, unjudged -> -1) and sets
// total_relevant from the qrels (0 for queries without judgments).
void attach_qrels(std::vector<RankedList>& lists, const Qrels& qrels);

// ---------------------------------------------------------------------------
// JSONL: one object per line with keys query_id, result_ids, scores and
// optionally labels, total_relevant, surprise and fit. Unknown keys are kept
// verbatim and written back after the known ones.

struct FitSummary {
  std::size_t i = 0;
  std::size_t j = 0;
  double u = 0.0;
  double c = 0.0;
  double alpha = 0.0;
  std::optional<std::size_t> cvm_evals;
};

struct JsonlRecord {
  RankedList list;
  std::optional<std::vector<double>> surprise;
  // fit_present with an empty `fit` serialises as "fit": null.
  bool fit_present = false;
  std::optional<FitSummary> fit;
  // Unknown keys with their raw JSON text.
  std::vector<std::pair<std::string, std::string>> extra;
};

// Throws ParseError (with the 1-based line) on malformed JSON or schema
// violations. Blank lines are skipped.
std::vector<JsonlRecord> read_jsonl(std::istream& in);
void write_jsonl(std::ostream& out, std::span<const JsonlRecord> records);

std::vector<RankedList> lists_of(std::span<const JsonlRecord> records);
std::vector<JsonlRecord> records_of(std::span<const RankedList> lists);

// Neighbourhood maps are stored as one JSON object {test_id: [train_id...]}.
baselines::NeighborhoodMap read_neighborhoods(std::istream& in);
void write_neighborhoods(std::ostream& out, const baselines::NeighborhoodMap& map);

// ---------------------------------------------------------------------------
// Synthetic benchmark.
//
// Each query q gets an offset mu_q ~ U[offset_lo, offset_hi]. Its index holds
// `background` non-relevant items with scores mu_q + X, X drawn from a GPD
// with shape tail_shape (<= 0) and scale tail_scale, and R_q relevant items,
// R_q uniform in [relevant_min, relevant_max]. A relevant item scores
// mu_q + b + relevant_shift + X, where b is the base quantile at
// 1 - list_length / background (the expected floor of the retrieved list).
// The top list_length items are returned with labels.
//
// Randomness: every query draws from its own std::mt19937_64 seeded with
// splitmix64(seed ^ splitmix64(index)), index = 0.. over training then test
// queries. Uniforms are (x >> 11 + 0.5) * 2^-53 and GPD draws use the inverse
// CDF, so datasets depend only on the config.

struct SyntheticConfig {
  std::size_t num_train = 500;
  std::size_t num_test = 500;
  std::size_t list_length = 200;
  std::size_t background = 100000;
  std::size_t relevant_min = 0;
  std::size_t relevant_max = 10;
  double offset_lo = 0.0;
  double offset_hi = 20.0;
  double tail_shape = 0.0;
  double tail_scale = 1.0;
  double relevant_shift = 4.0;
  std::size_t neighbors = 20;
  std::uint64_t seed = 1;
};

// Throws ConfigError on invalid settings.
void validate(const SyntheticConfig& config);

struct QueryTruth {
  std::string query_id;
  std::string split;  // "train" or "test"
  double offset = 0.0;
  std::size_t total_relevant = 0;
  std::size_t relevant_retrieved = 0;
};

struct SyntheticDataset {
  std::vector<RankedList> train;
  std::vector<RankedList> test;
  // Test queries -> nearest training queries by offset.
  baselines::NeighborhoodMap neighborhoods;
  std::vector<QueryTruth> truth;
};

SyntheticDataset generate_synthetic(const SyntheticConfig& config);

void write_truth(std::ostream& out, std::span<const QueryTruth> truth);

// Deterministic per-query stream seed used by the generator.
std::uint64_t query_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace evtcut::io
