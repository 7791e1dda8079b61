#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "evtcut/data_io.hpp"
#include "evtcut/errors.hpp"

namespace evtcut::io {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> fields;
  std::string f;
  while (ss >> f) fields.push_back(f);
  return fields;
}

bool parse_size(const std::string& text, std::size_t& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_int(const std::string& text, int& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_double(const std::string& text, double& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Orientation parse_orientation(std::string_view name) {
  if (name == "higher") return Orientation::kHigherBetter;
  if (name == "lower") return Orientation::kLowerBetter;
  throw DomainError("unknown orientation '" + std::string(name) + "' (expected higher, lower)");
}

std::vector<TrecRunRecord> read_trec_records(std::istream& in) {
  std::vector<TrecRunRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 6) {
      throw ParseError(line_no, "run line needs 6 fields (qid Q0 docid rank score tag), got " +
                                    std::to_string(fields.size()));
    }
    TrecRunRecord r;
    r.qid = fields[0];
    r.docid = fields[2];
    r.tag = fields[5];
    r.line = line_no;
    if (!parse_size(fields[3], r.rank) || r.rank == 0) {
      throw ParseError(line_no, "rank '" + fields[3] + "' is not a positive integer");
    }
    if (!parse_double(fields[4], r.score)) {
      throw ParseError(line_no, "score '" + fields[4] + "' is not a finite number");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RankedList> group_trec_run(std::span<const TrecRunRecord> records,
                                       Orientation orientation) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TrecRunRecord*>> groups;
  for (const TrecRunRecord& r : records) {
    auto [it, inserted] = groups.try_emplace(r.qid);
    if (inserted) order.push_back(r.qid);
    it->second.push_back(&r);
  }

  std::vector<RankedList> lists;
  lists.reserve(order.size());
  for (const std::string& qid : order) {
    auto& group = groups[qid];
    std::stable_sort(group.begin(), group.end(),
                     [](const auto* a, const auto* b) { return a->rank < b->rank; });
    RankedList list;
    list.query_id = qid;
    std::set<std::string> seen;
    for (std::size_t k = 0; k < group.size(); ++k) {
      const TrecRunRecord& r = *group[k];
      if (!seen.insert(r.docid).second) {
        throw ParseError(r.line, "duplicate document " + r.docid + " for query " + qid);
      }
      if (k > 0 && group[k - 1]->rank == r.rank) {
        throw ParseError(r.line, "repeated rank " + std::to_string(r.rank) + " for query " + qid);
      }
      const double s = orientation == Orientation::kLowerBetter ? -r.score : r.score;
      if (k > 0 && s > list.scores.back()) {
        throw ParseError(r.line, "score order contradicts rank order for query " + qid);
      }
      list.result_ids.push_back(r.docid);
      list.scores.push_back(s);
    }
    lists.push_back(std::move(list));
  }
  return lists;
}

std::vector<RankedList> parse_trec_run(std::istream& in, Orientation orientation) {
  const auto records = read_trec_records(in);
  return group_trec_run(records, orientation);
}

void write_trec_run(std::ostream& out, std::span<const TrecRunRecord> records) {
  for (const TrecRunRecord& r : records) {
    out << r.qid << " Q0 " << r.docid << ' ' << r.rank << ' ' << format_double(r.score) << ' '
        << r.tag << '\n';
  }
}

std::vector<TrecRunRecord> to_trec_records(std::span<const RankedList> lists,
                                           Orientation orientation, const std::string& tag) {
  std::vector<TrecRunRecord> out;
  for (const RankedList& list : lists) {
    for (std::size_t k = 0; k < list.size(); ++k) {
      const double s = orientation == Orientation::kLowerBetter ? -list.scores[k] : list.scores[k];
      out.push_back({list.query_id, list.result_ids[k], k + 1, s, tag, 0});
    }
  }
  return out;
}

Qrels parse_qrels(std::istream& in) {
  Qrels q;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 4) {
      throw ParseError(line_no, "qrels line needs 4 fields (qid iter docid rel), got " +
                                    std::to_string(fields.size()));
    }
    QrelRecord r{fields[0], fields[1], fields[2], 0};
    if (!parse_int(fields[3], r.rel)) {
      throw ParseError(line_no, "relevance '" + fields[3] + "' is not an integer");
    }
    auto& judged = q.judgments[r.qid];
    if (!judged.emplace(r.docid, r.rel > 0 ? 1 : -1).second) {
      throw ParseError(line_no, "duplicate judgment for " + r.qid + " " + r.docid);
    }
    auto& total = q.total_relevant[r.qid];
    if (r.rel > 0) ++total;
    q.records.push_back(std::move(r));
  }
  return q;
}

void attach_qrels(std::vector<RankedList>& lists, const Qrels& qrels) {
  for (RankedList& list : lists) {
    std::vector<int> labels(list.size(), -1);
    std::size_t total = 0;
    const auto judged = qrels.judgments.find(list.query_id);
    if (judged != qrels.judgments.end()) {
      for (std::size_t k = 0; k < list.size(); ++k) {
        const auto it = judged->second.find(list.result_ids[k]);
        if (it != judged->second.end()) labels[k] = it->second;
      }
      total = qrels.total_relevant.at(list.query_id);
    }
    list.labels = std::move(labels);
    list.total_relevant = total;
  }
}

}  // namespace evtcut::io
