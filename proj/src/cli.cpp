#include "evtcut/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "evtcut/data_io.hpp"
#include "evtcut/errors.hpp"
#include "evtcut/pipeline.hpp"
#include "json.hpp"

namespace evtcut::cli {

namespace {

// Bad flags or flag combinations (exit 1), as opposed to bad data (exit 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

struct InputFlags {
  std::string input;
  std::string format = "jsonl";
  std::string qrels;
  std::string orientation = "higher";
};

struct FitFlags {
  std::size_t m_min = 10;
  double trim_cap = 0.5;
  bool fit_full_tail = false;

  surprise::SurpriseOptions options() const {
    surprise::SurpriseOptions o;
    o.min_window = m_min;
    o.trim_cap = trim_cap;
    o.fit_full_tail = fit_full_tail;
    return o;
  }
};

struct SweepFlags {
  std::string range = "0:8";
  double step = 0.05;

  truncation::SweepOptions options() const {
    const auto colon = range.find(':');
    if (colon == std::string::npos) throw UsageError("--sweep-range must look like LO:HI");
    truncation::SweepOptions o;
    try {
      o.lo = std::stod(range.substr(0, colon));
      o.hi = std::stod(range.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError("--sweep-range must look like LO:HI");
    }
    o.step = step;
    if (!(o.lo < o.hi) || !(o.step > 0.0)) {
      throw UsageError("--sweep-range needs LO < HI and --sweep-step > 0");
    }
    return o;
  }
};

std::string fixed(double v, const char* fmt = "%.10g") {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

metrics::Metric metric_flag(const std::string& name) {
  try {
    return metrics::parse_metric(name);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

io::Orientation orientation_flag(const std::string& name) {
  try {
    return io::parse_orientation(name);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  return in;
}

std::vector<io::JsonlRecord> load_records(const InputFlags& flags) {
  const io::Orientation orientation = orientation_flag(flags.orientation);
  std::vector<io::JsonlRecord> records;
  {
    std::ifstream in = open_input(flags.input);
    if (flags.format == "jsonl") {
      records = io::read_jsonl(in);
      if (orientation == io::Orientation::kLowerBetter) {
        throw UsageError("--orientation lower applies to TREC input; JSONL scores are stored "
                         "higher-is-better");
      }
    } else if (flags.format == "trec") {
      const auto lists = io::parse_trec_run(in, orientation);
      records = io::records_of(lists);
    } else {
      throw UsageError("--format must be trec or jsonl");
    }
  }
  if (!flags.qrels.empty()) {
    std::ifstream in = open_input(flags.qrels);
    const io::Qrels qrels = io::parse_qrels(in);
    auto lists = io::lists_of(records);
    io::attach_qrels(lists, qrels);
    for (std::size_t q = 0; q < lists.size(); ++q) records[q].list = std::move(lists[q]);
  }
  if (records.empty()) throw Error(flags.input + " holds no queries");
  return records;
}

// Fills missing surprise vectors; returns the number of warnings.
std::size_t ensure_surprise(std::vector<io::JsonlRecord>& records, const FitFlags& fit,
                            std::ostream& err) {
  std::vector<RankedList> todo;
  std::vector<std::size_t> where;
  for (std::size_t q = 0; q < records.size(); ++q) {
    if (!records[q].surprise) {
      todo.push_back(records[q].list);
      where.push_back(q);
    }
  }
  const auto rescored = pipeline::rescore_all(todo, fit.options());
  std::size_t warnings = 0;
  for (std::size_t t = 0; t < todo.size(); ++t) {
    records[where[t]].surprise = rescored[t].surprise;
    if (!rescored[t].warning.empty()) {
      err << "warning: query " << todo[t].query_id << ": " << rescored[t].warning << '\n';
      ++warnings;
    }
  }
  return warnings;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}
  std::ostream& stream() { return buffer_; }
  void commit() {
    if (path_.empty() || path_ == "-") {
      fallback_ << buffer_.str();
      fallback_.flush();
      return;
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) throw Error("cannot write " + path_);
    f << buffer_.str();
  }

 private:
  std::string path_;
  std::ostream& fallback_;
  std::ostringstream buffer_;
};

bool all_labeled(const std::vector<io::JsonlRecord>& records) {
  for (const auto& r : records) {
    if (!r.list.labeled()) return false;
  }
  return true;
}

nlohmann::ordered_json report_json(const metrics::EvalReport& report) {
  nlohmann::ordered_json j;
  j["metric"] = report.metric_name;
  j["queries"] = report.query_count();
  j["mean"] = nlohmann::ordered_json::object();
  for (const auto& p : report.policies) j["mean"][p] = report.mean.at(p);
  j["per_query"] = nlohmann::ordered_json::array();
  for (std::size_t q = 0; q < report.query_count(); ++q) {
    nlohmann::ordered_json row;
    row["query_id"] = report.query_ids[q];
    for (const auto& p : report.policies) row[p] = report.per_query.at(p)[q];
    j["per_query"].push_back(std::move(row));
  }
  return j;
}

void print_table(std::ostream& err, const metrics::EvalReport& report) {
  err << std::left << std::setw(16) << "policy" << report.metric_name << '\n';
  for (const auto& p : report.policies) {
    err << std::left << std::setw(16) << p << fixed(report.mean.at(p), "%.4f") << '\n';
  }
}

void write_decisions(std::ostream& out,
                     const std::vector<truncation::TruncationDecision>& decisions) {
  for (const auto& d : decisions) {
    out << "{\"query_id\":" << nlohmann::json(d.query_id).dump() << ",\"k\":" << d.k
        << ",\"threshold\":" << fixed(d.threshold) << ",\"policy\":" << nlohmann::json(d.policy).dump()
        << "}\n";
  }
}

// ---------------------------------------------------------------------------

int cmd_rescore(const InputFlags& in, const FitFlags& fit, const std::string& output, bool verbose,
                std::ostream& out, std::ostream& err) {
  auto records = load_records(in);
  const auto lists = io::lists_of(records);
  const auto rescored = pipeline::rescore_all(lists, fit.options());
  std::size_t warnings = 0;
  for (std::size_t q = 0; q < records.size(); ++q) {
    io::JsonlRecord& rec = records[q];
    rec.surprise = rescored[q].surprise;
    rec.fit_present = true;
    rec.fit.reset();
    if (rescored[q].result) {
      const auto& r = *rescored[q].result;
      rec.fit = io::FitSummary{r.window.i, r.window.j, r.u, r.gpd.c, r.gpd.alpha,
                               r.cvm_trace.size()};
      if (verbose) {
        err << "query " << rec.list.query_id << ": i=" << r.window.i << " j=" << r.window.j
            << " n=" << r.window.n << " u=" << fixed(r.u) << " c=" << fixed(r.gpd.c)
            << " alpha=" << fixed(r.gpd.alpha) << " cvm_evals=" << r.cvm_trace.size() << '\n';
      }
    } else {
      err << "warning: query " << rec.list.query_id << ": " << rescored[q].warning << '\n';
      ++warnings;
    }
  }
  Output sink(output, out);
  io::write_jsonl(sink.stream(), records);
  sink.commit();
  if (warnings > 0) err << warnings << " queries emitted without a fit\n";
  return kOk;
}

struct ThresholdFlags {
  std::optional<double> threshold;
  std::optional<double> pvalue;
  bool sweep = false;
  std::string train;
};

int cmd_truncate(const InputFlags& in, const FitFlags& fit, const SweepFlags& sweep_flags,
                 const ThresholdFlags& th, const std::string& metric_name,
                 const std::string& output, const std::string& report_path, bool verbose,
                 std::ostream& out, std::ostream& err) {
  const int modes = (th.threshold ? 1 : 0) + (th.pvalue ? 1 : 0) + (th.sweep ? 1 : 0);
  if (modes != 1) throw UsageError("give exactly one of --threshold, --pvalue, --sweep");
  const metrics::Metric metric = metric_flag(metric_name);

  double tau = 0.0;
  if (th.threshold) {
    tau = *th.threshold;
    if (!std::isfinite(tau)) throw UsageError("--threshold must be finite");
  } else if (th.pvalue) {
    try {
      tau = truncation::surprise_from_pvalue(*th.pvalue);
    } catch (const DomainError& e) {
      throw UsageError(std::string("--pvalue: ") + e.what());
    }
  } else {
    if (th.train.empty()) throw UsageError("--sweep needs --train");
    const auto sweep_options = sweep_flags.options();
    InputFlags train_in = in;
    train_in.input = th.train;
    auto train = load_records(train_in);
    if (!all_labeled(train)) throw Error("--sweep needs labeled training queries");
    ensure_surprise(train, fit, err);
    const auto lists = io::lists_of(train);
    std::vector<std::vector<double>> surprise;
    for (const auto& r : train) surprise.push_back(*r.surprise);
    const auto result = truncation::sweep_threshold(lists, surprise, metric, sweep_options);
    tau = result.best_threshold;
    if (verbose) {
      err << "sweep: best threshold " << fixed(tau) << " (train " << metric_name << " "
          << fixed(result.mean_metric[result.best_index], "%.6f") << ")\n";
    }
  }

  auto records = load_records(in);
  const std::size_t warnings = ensure_surprise(records, fit, err);
  std::vector<truncation::TruncationDecision> decisions;
  decisions.reserve(records.size());
  for (const auto& r : records) {
    decisions.push_back(truncation::truncate_at_threshold(*r.surprise, tau, r.list.query_id));
  }

  Output sink(output, out);
  write_decisions(sink.stream(), decisions);
  sink.commit();

  if (all_labeled(records)) {
    metrics::EvalReport report;
    report.metric_name = metric_name;
    std::vector<double> values;
    for (std::size_t q = 0; q < records.size(); ++q) {
      report.query_ids.push_back(records[q].list.query_id);
      values.push_back(metrics::metric_at_k(records[q].list, decisions[q].k, metric));
    }
    metrics::add_policy(report, "surprise", std::move(values));
    if (!report_path.empty()) {
      Output rep(report_path, out);
      rep.stream() << report_json(report).dump() << '\n';
      rep.commit();
    } else {
      print_table(err, report);
    }
  } else if (!report_path.empty()) {
    throw Error("--report needs labeled input");
  }
  if (warnings > 0) err << warnings << " queries had no fit and were cut at k=0\n";
  return kOk;
}

int cmd_baselines(const InputFlags& test_in, const std::string& train_path,
                  const std::string& neighborhood_path, const std::string& policies,
                  const FitFlags& fit, const SweepFlags& sweep_flags,
                  const std::string& metric_name, const std::string& output,
                  const std::string& decisions_path, bool verbose, std::ostream& out,
                  std::ostream& err) {
  pipeline::BenchmarkOptions options;
  options.metric = metric_flag(metric_name);
  options.sweep = sweep_flags.options();
  options.surprise = fit.options();
  if (policies != "all") {
    options.policies.clear();
    std::stringstream ss(policies);
    std::string p;
    while (std::getline(ss, p, ',')) {
      if (std::find(pipeline::all_policies().begin(), pipeline::all_policies().end(), p) ==
          pipeline::all_policies().end()) {
        throw UsageError("unknown policy '" + p + "'");
      }
      options.policies.push_back(p);
    }
  }
  std::optional<baselines::NeighborhoodMap> neighborhoods;
  if (!neighborhood_path.empty()) {
    std::ifstream in = open_input(neighborhood_path);
    neighborhoods = io::read_neighborhoods(in);
  }
  for (const auto& p : options.policies) {
    if ((p == "local_k" || p == "isotonic") && !neighborhoods) {
      throw UsageError("policy " + p + " needs --neighborhood");
    }
  }

  InputFlags train_in = test_in;
  train_in.input = train_path;
  const auto train = io::lists_of(load_records(train_in));
  const auto test = io::lists_of(load_records(test_in));
  const auto result = pipeline::run_benchmark(train, test, neighborhoods ? &*neighborhoods : nullptr,
                                              options);

  nlohmann::ordered_json j = report_json(result.report);
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (const auto& p : options.policies) {
    if (p == "global_k") params["global_k"] = result.global_k;
    if (p == "raw_threshold") {
      params["raw_threshold"] = std::isfinite(result.raw_threshold)
                                    ? nlohmann::ordered_json(result.raw_threshold)
                                    : nlohmann::ordered_json(nullptr);
    }
    if (p == "surprise") params["surprise_threshold"] = result.train_sweep.best_threshold;
  }
  j["parameters"] = params;

  Output sink(output, out);
  sink.stream() << j.dump() << '\n';
  sink.commit();
  if (!decisions_path.empty()) {
    Output dec(decisions_path, out);
    for (const auto& p : options.policies) write_decisions(dec.stream(), result.decisions.at(p));
    dec.commit();
  }
  if (verbose) print_table(err, result.report);
  return kOk;
}

int cmd_simulate(const io::SyntheticConfig& config, const std::string& dir, bool verbose,
                 std::ostream& err) {
  try {
    io::validate(config);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const io::SyntheticDataset data = io::generate_synthetic(config);
  std::filesystem::create_directories(dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };

  std::ostringstream sink;
  const auto flush = [&](const std::string& file) {
    std::ofstream f(file, std::ios::binary);
    if (!f) throw Error("cannot write " + file);
    f << sink.str();
    sink.str("");
  };
  io::write_jsonl(sink, io::records_of(data.train));
  flush(path("train.jsonl"));
  io::write_jsonl(sink, io::records_of(data.test));
  flush(path("test.jsonl"));
  io::write_neighborhoods(sink, data.neighborhoods);
  flush(path("neighborhoods.json"));
  io::write_truth(sink, data.truth);
  flush(path("truth.jsonl"));
  if (verbose) {
    err << "wrote " << data.train.size() << " train and " << data.test.size()
        << " test queries to " << dir << '\n';
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Surprise scoring and result-list truncation", "evtcut"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  app.add_flag("--verbose,-v", verbose, "Diagnostics on stderr");

  const auto add_input = [](CLI::App* sub, InputFlags& f, const char* name, const char* help) {
    sub->add_option(name, f.input, help)->required();
    sub->add_option("--format", f.format, "Input format: jsonl or trec")
        ->check(CLI::IsMember({"jsonl", "trec"}))
        ->capture_default_str();
    sub->add_option("--qrels", f.qrels, "qrels file used to label the input");
    sub->add_option("--orientation", f.orientation, "Score orientation: higher or lower")
        ->check(CLI::IsMember({"higher", "lower"}))
        ->capture_default_str();
  };
  const auto add_fit = [](CLI::App* sub, FitFlags& f) {
    sub->add_option("--m-min", f.m_min, "Minimum fit window")->capture_default_str();
    sub->add_option("--trim-cap", f.trim_cap, "Maximum trimmed fraction per side")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub->add_flag("--fit-full-tail", f.fit_full_tail,
                  "Fit the GPD on every score above u, not only the selected window");
  };
  const auto add_sweep = [](CLI::App* sub, SweepFlags& f) {
    sub->add_option("--sweep-range", f.range, "Threshold sweep range LO:HI")
        ->capture_default_str();
    sub->add_option("--sweep-step", f.step, "Threshold sweep step")->capture_default_str();
  };

  // rescore
  InputFlags r_in;
  FitFlags r_fit;
  std::string r_out = "-";
  auto* rescore = app.add_subcommand("rescore", "Attach Surprise scores and fit diagnostics");
  add_input(rescore, r_in, "--input", "Ranked lists (JSONL or TREC run)");
  add_fit(rescore, r_fit);
  rescore->add_option("--output", r_out, "Output JSONL ('-' for stdout)");

  // truncate
  InputFlags t_in;
  FitFlags t_fit;
  SweepFlags t_sweep;
  ThresholdFlags t_th;
  std::string t_metric = "f1";
  std::string t_out = "-";
  std::string t_report;
  auto* trunc = app.add_subcommand("truncate", "Cut lists at a Surprise threshold");
  add_input(trunc, t_in, "--input", "Lists to truncate (rescored if surprise is missing)");
  add_fit(trunc, t_fit);
  add_sweep(trunc, t_sweep);
  auto* opt_t = trunc->add_option("--threshold", t_th.threshold, "Surprise threshold");
  auto* opt_p = trunc->add_option("--pvalue", t_th.pvalue, "p-value threshold, exp(-surprise)");
  auto* opt_s = trunc->add_flag("--sweep", t_th.sweep, "Pick the threshold on --train");
  opt_t->excludes(opt_p)->excludes(opt_s);
  opt_p->excludes(opt_s);
  trunc->add_option("--train", t_th.train, "Labeled training lists for --sweep");
  trunc->add_option("--metric", t_metric, "f1, dcg or accuracy")->capture_default_str();
  trunc->add_option("--output", t_out, "Decisions JSONL ('-' for stdout)");
  trunc->add_option("--report", t_report, "Write an evaluation report (labeled input)");

  // baselines
  InputFlags b_in;
  FitFlags b_fit;
  SweepFlags b_sweep;
  std::string b_train;
  std::string b_neighborhood;
  std::string b_policies = "all";
  std::string b_metric = "f1";
  std::string b_out = "-";
  std::string b_decisions;
  auto* base = app.add_subcommand("baselines", "Compare truncation policies on train/test");
  add_input(base, b_in, "--input", "Labeled test lists");
  add_fit(base, b_fit);
  add_sweep(base, b_sweep);
  base->add_option("--train", b_train, "Labeled training lists")->required();
  base->add_option("--neighborhood", b_neighborhood, "Neighbourhood map JSON");
  base->add_option("--policies", b_policies,
                   "Comma list of oracle,global_k,local_k,isotonic,raw_threshold,surprise")
      ->capture_default_str();
  base->add_option("--metric", b_metric, "f1, dcg or accuracy")->capture_default_str();
  base->add_option("--output", b_out, "Report JSON ('-' for stdout)");
  base->add_option("--decisions", b_decisions, "Write every policy's decisions as JSONL");

  // simulate
  io::SyntheticConfig sim;
  std::string s_dir;
  std::string s_offsets = "0:20";
  auto* simulate = app.add_subcommand("simulate", "Write a seeded synthetic benchmark");
  simulate->add_option("--output", s_dir, "Output directory")->required();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--num-train", sim.num_train)->capture_default_str();
  simulate->add_option("--num-test", sim.num_test)->capture_default_str();
  simulate->add_option("--list-length", sim.list_length)->capture_default_str();
  simulate->add_option("--background", sim.background)->capture_default_str();
  simulate->add_option("--relevant-min", sim.relevant_min)->capture_default_str();
  simulate->add_option("--relevant-max", sim.relevant_max)->capture_default_str();
  simulate->add_option("--offset-range", s_offsets, "Query offset range LO:HI")
      ->capture_default_str();
  simulate->add_option("--tail-shape", sim.tail_shape)->capture_default_str();
  simulate->add_option("--tail-scale", sim.tail_scale)->capture_default_str();
  simulate->add_option("--relevant-shift", sim.relevant_shift)->capture_default_str();
  simulate->add_option("--neighbors", sim.neighbors, "Neighbourhood size per test query")
      ->capture_default_str();

  std::vector<std::string> argv_store(args.begin(), args.end());
  if (argv_store.empty()) argv_store.emplace_back("evtcut");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (rescore->parsed()) return cmd_rescore(r_in, r_fit, r_out, verbose, out, err);
    if (trunc->parsed()) {
      return cmd_truncate(t_in, t_fit, t_sweep, t_th, t_metric, t_out, t_report, verbose, out,
                          err);
    }
    if (base->parsed()) {
      return cmd_baselines(b_in, b_train, b_neighborhood, b_policies, b_fit, b_sweep, b_metric,
                           b_out, b_decisions, verbose, out, err);
    }
    if (simulate->parsed()) {
      const auto colon = s_offsets.find(':');
      if (colon == std::string::npos) throw UsageError("--offset-range must look like LO:HI");
      try {
        sim.offset_lo = std::stod(s_offsets.substr(0, colon));
        sim.offset_hi = std::stod(s_offsets.substr(colon + 1));
      } catch (const std::exception&) {
        throw UsageError("--offset-range must look like LO:HI");
      }
      return cmd_simulate(sim, s_dir, verbose, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace evtcut::cli
