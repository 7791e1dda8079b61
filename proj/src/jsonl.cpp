#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "evtcut/data_io.hpp"
#include "evtcut/errors.hpp"
#include "json.hpp"

namespace evtcut::io {

namespace {

using ordered_json = nlohmann::ordered_json;

const std::set<std::string> kKnownKeys = {"query_id", "result_ids", "scores", "labels",
                                          "total_relevant", "surprise", "fit"};

// 17 significant digits; values that print like integers keep a fraction so
// they read back as floating point (this also preserves -0).
std::string number(double v) {
  if (!std::isfinite(v)) throw ContractError("cannot serialise a non-finite number");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) { return ordered_json(s).dump(); }

void write_numbers(std::ostream& out, const std::vector<double>& values) {
  out << '[';
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) out << ',';
    out << number(values[k]);
  }
  out << ']';
}

std::vector<double> read_numbers(const ordered_json& v, const char* key) {
  if (!v.is_array()) throw Error(std::string("\"") + key + "\" must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw Error(std::string("\"") + key + "\" must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::size_t read_count(const ordered_json& v, const char* key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw Error(std::string("\"") + key + "\" must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

double read_real(const ordered_json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw Error(std::string("fit.") + key + " must be a number");
  }
  return obj[key].get<double>();
}

JsonlRecord parse_record(const ordered_json& obj) {
  if (!obj.is_object()) throw Error("line is not a JSON object");
  for (const char* key : {"query_id", "result_ids", "scores"}) {
    if (!obj.contains(key)) throw Error(std::string("missing required key \"") + key + "\"");
  }
  JsonlRecord rec;
  RankedList& list = rec.list;
  if (!obj["query_id"].is_string()) throw Error("\"query_id\" must be a string");
  list.query_id = obj["query_id"].get<std::string>();

  if (!obj["result_ids"].is_array()) throw Error("\"result_ids\" must be an array");
  for (const auto& id : obj["result_ids"]) {
    if (!id.is_string()) throw Error("\"result_ids\" must hold strings");
    list.result_ids.push_back(id.get<std::string>());
  }
  list.scores = read_numbers(obj["scores"], "scores");
  const std::size_t n = list.scores.size();
  if (list.result_ids.size() != n) throw Error("\"result_ids\" and \"scores\" differ in length");

  if (obj.contains("labels") && !obj["labels"].is_null()) {
    const auto& labels = obj["labels"];
    if (!labels.is_array()) throw Error("\"labels\" must be an array");
    std::vector<int> out;
    for (const auto& l : labels) {
      if (!l.is_number_integer() || (l.get<int>() != 1 && l.get<int>() != -1)) {
        throw Error("\"labels\" must hold +1 or -1");
      }
      out.push_back(l.get<int>());
    }
    if (out.size() != n) throw Error("\"labels\" has the wrong length");
    list.labels = std::move(out);
  }
  if (obj.contains("total_relevant") && !obj["total_relevant"].is_null()) {
    list.total_relevant = read_count(obj["total_relevant"], "total_relevant");
  }
  if (obj.contains("surprise") && !obj["surprise"].is_null()) {
    rec.surprise = read_numbers(obj["surprise"], "surprise");
    if (rec.surprise->size() != n) throw Error("\"surprise\" has the wrong length");
  }
  if (obj.contains("fit")) {
    rec.fit_present = true;
    const auto& fit = obj["fit"];
    if (!fit.is_null()) {
      if (!fit.is_object()) throw Error("\"fit\" must be an object or null");
      FitSummary f;
      for (const char* key : {"i", "j"}) {
        if (!fit.contains(key)) throw Error(std::string("fit.") + key + " is missing");
      }
      f.i = read_count(fit["i"], "fit.i");
      f.j = read_count(fit["j"], "fit.j");
      f.u = read_real(fit, "u");
      f.c = read_real(fit, "c");
      f.alpha = read_real(fit, "alpha");
      if (fit.contains("cvm_evals")) f.cvm_evals = read_count(fit["cvm_evals"], "fit.cvm_evals");
      rec.fit = f;
    }
  }
  for (const auto& [key, value] : obj.items()) {
    if (!kKnownKeys.count(key)) rec.extra.emplace_back(key, value.dump());
  }
  try {
    validate(list);
  } catch (const ContractError& e) {
    throw Error(e.what());
  }
  return rec;
}

}  // namespace

std::vector<JsonlRecord> read_jsonl(std::istream& in) {
  std::vector<JsonlRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    try {
      out.push_back(parse_record(obj));
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

void write_jsonl(std::ostream& out, std::span<const JsonlRecord> records) {
  for (const JsonlRecord& rec : records) {
    const RankedList& list = rec.list;
    out << "{\"query_id\":" << quoted(list.query_id) << ",\"result_ids\":[";
    for (std::size_t k = 0; k < list.result_ids.size(); ++k) {
      if (k > 0) out << ',';
      out << quoted(list.result_ids[k]);
    }
    out << "],\"scores\":";
    write_numbers(out, list.scores);
    if (list.labels) {
      out << ",\"labels\":[";
      for (std::size_t k = 0; k < list.labels->size(); ++k) {
        if (k > 0) out << ',';
        out << (*list.labels)[k];
      }
      out << ']';
    }
    if (list.total_relevant) out << ",\"total_relevant\":" << *list.total_relevant;
    if (rec.surprise) {
      out << ",\"surprise\":";
      write_numbers(out, *rec.surprise);
    }
    if (rec.fit_present || rec.fit) {
      out << ",\"fit\":";
      if (rec.fit) {
        const FitSummary& f = *rec.fit;
        out << "{\"i\":" << f.i << ",\"j\":" << f.j << ",\"u\":" << number(f.u)
            << ",\"c\":" << number(f.c) << ",\"alpha\":" << number(f.alpha);
        if (f.cvm_evals) out << ",\"cvm_evals\":" << *f.cvm_evals;
        out << '}';
      } else {
        out << "null";
      }
    }
    for (const auto& [key, raw] : rec.extra) out << ',' << quoted(key) << ':' << raw;
    out << "}\n";
  }
}

std::vector<RankedList> lists_of(std::span<const JsonlRecord> records) {
  std::vector<RankedList> out;
  out.reserve(records.size());
  for (const JsonlRecord& r : records) out.push_back(r.list);
  return out;
}

std::vector<JsonlRecord> records_of(std::span<const RankedList> lists) {
  std::vector<JsonlRecord> out;
  out.reserve(lists.size());
  for (const RankedList& l : lists) out.push_back(JsonlRecord{l, {}, false, {}, {}});
  return out;
}

baselines::NeighborhoodMap read_neighborhoods(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("invalid neighbourhood JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError(0, "neighbourhood file must be a JSON object");
  baselines::NeighborhoodMap map;
  for (const auto& [qid, ids] : doc.items()) {
    if (!ids.is_array()) throw ParseError(0, "neighbourhood of " + qid + " must be an array");
    auto& out = map[qid];
    for (const auto& id : ids) {
      if (!id.is_string()) throw ParseError(0, "neighbourhood of " + qid + " must hold strings");
      out.push_back(id.get<std::string>());
    }
  }
  return map;
}

void write_neighborhoods(std::ostream& out, const baselines::NeighborhoodMap& map) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [qid, ids] : map) doc[qid] = ids;
  out << doc.dump() << '\n';
}

}  // namespace evtcut::io
