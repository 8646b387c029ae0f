#pragma once

// summary.csv, trials.jsonl and sweep_<name>.csv.
//
// summary.csv: one row per algorithm (and sweep value), one column per
// criterion:metric, cells "mean±std" in shortest round-trip form, NA where
// no split produced a usable trial.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pubench/harness/benchmark.hpp"

namespace pubench::harness {

using nlohmann::json;

inline json to_json(const TrialResult& t) {
  json j;
  j["algorithm"] = t.algorithm;
  j["algorithm_index"] = t.algorithm_index;
  j["seed"] = t.master_seed;
  j["split"] = t.split;
  j["draw"] = t.draw;
  j["sweep"] = t.sweep_name ? json{{"name", *t.sweep_name}, {"value", *t.sweep_value}}
                            : json(nullptr);
  j["hyperparams"] = {{"learning_rate", t.hyperparams.learning_rate},
                      {"batch_size", t.hyperparams.batch_size},
                      {"batch_p", t.batch_p},
                      {"batch_u", t.batch_u},
                      {"momentum", t.hyperparams.momentum},
                      {"weight_decay", t.hyperparams.weight_decay},
                      {"tolerance", t.hyperparams.tolerance}};
  json cks = json::array();
  for (const auto& c : t.checkpoints) {
    cks.push_back({{"iteration", c.iteration},
                   {"objective", c.objective},
                   {"threshold", c.threshold ? json(*c.threshold) : json(nullptr)},
                   {"criteria", c.criteria},
                   {"metrics", c.metrics}});
  }
  j["checkpoints"] = std::move(cks);
  j["selected"] = t.selected;
  j["failed"] = t.failed;
  j["failure"] = t.failure;
  return j;
}

inline TrialResult trial_from_json(const json& j) {
  TrialResult t;
  t.algorithm = j.at("algorithm").get<std::string>();
  t.algorithm_index = j.at("algorithm_index").get<std::size_t>();
  t.master_seed = j.at("seed").get<std::uint64_t>();
  t.split = j.at("split").get<std::size_t>();
  t.draw = j.at("draw").get<std::size_t>();
  if (const auto& sw = j.at("sweep"); !sw.is_null()) {
    t.sweep_name = sw.at("name").get<std::string>();
    t.sweep_value = sw.at("value").get<double>();
  }
  const auto& h = j.at("hyperparams");
  t.hyperparams.learning_rate = h.at("learning_rate").get<double>();
  t.hyperparams.batch_size = h.at("batch_size").get<std::size_t>();
  t.hyperparams.momentum = h.at("momentum").get<double>();
  t.hyperparams.weight_decay = h.at("weight_decay").get<double>();
  t.hyperparams.tolerance = h.at("tolerance").get<double>();
  t.batch_p = h.at("batch_p").get<std::size_t>();
  t.batch_u = h.at("batch_u").get<std::size_t>();
  for (const auto& c : j.at("checkpoints")) {
    CheckpointRecord r;
    r.iteration = c.at("iteration").get<std::size_t>();
    r.objective = c.at("objective").get<double>();
    if (!c.at("threshold").is_null()) r.threshold = c.at("threshold").get<double>();
    r.criteria = c.at("criteria").get<std::map<std::string, double>>();
    r.metrics = c.at("metrics").get<std::map<std::string, double>>();
    t.checkpoints.push_back(std::move(r));
  }
  t.selected = j.at("selected").get<std::map<std::string, std::size_t>>();
  t.failed = j.at("failed").get<bool>();
  t.failure = j.at("failure").get<std::string>();
  return t;
}

inline void write_trials_jsonl(const std::vector<TrialResult>& trials, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& t : trials) out << to_json(t).dump() << '\n';
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::vector<TrialResult> read_trials_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::vector<TrialResult> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      trials.push_back(trial_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(path, line_no, 1, e.what());
    }
  }
  return trials;
}

inline std::string format_cell(const std::optional<Cell>& c) {
  if (!c) return "NA";
  return csv::format_double(c->mean) + "±" + csv::format_double(c->std);
}

inline std::string render_summary_csv(const Summary& s) {
  std::string out = "algorithm";
  if (s.sweep_name) out += "," + *s.sweep_name;
  for (const auto& c : s.criteria) {
    for (const auto& m : s.metrics) out += "," + c + ":" + m;
  }
  out += '\n';
  if (s.empty()) return out;
  for (const auto& r : s.rows) {
    out += r.algorithm;
    if (s.sweep_name) out += "," + csv::format_double(*r.sweep_value);
    for (const auto& c : r.cells) out += "," + format_cell(c);
    out += '\n';
  }
  return out;
}

// Long format for plotting: one line per (sweep value, algorithm,
// criterion, metric).
inline std::string render_sweep_csv(const Summary& s) {
  std::string out = *s.sweep_name + ",algorithm,criterion,metric,mean,std,n\n";
  for (const auto& r : s.rows) {
    std::size_t k = 0;
    for (const auto& c : s.criteria) {
      for (const auto& m : s.metrics) {
        const auto& cell = r.cells[k++];
        out += csv::format_double(*r.sweep_value) + "," + r.algorithm + "," + c + "," + m + ",";
        out += cell ? csv::format_double(cell->mean) + "," + csv::format_double(cell->std) + "," +
                          std::to_string(cell->n)
                    : "NA,NA,0";
        out += '\n';
      }
    }
  }
  return out;
}

inline void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

// Writes summary.csv and, for a sweep, sweep_<name>.csv. Returns false when
// the summary is empty.
inline bool emit_summary(const Summary& s, const std::filesystem::path& dir,
                         std::ostream& log = std::cerr) {
  ensure_directory(dir);
  write_text(render_summary_csv(s), dir / "summary.csv");
  if (s.sweep_name) write_text(render_sweep_csv(s), dir / ("sweep_" + *s.sweep_name + ".csv"));
  for (const auto& f : s.failures) log << "warning: failed trial: " << f << '\n';
  if (s.empty()) {
    log << "warning: every trial failed; summary.csv has only a header\n";
    return false;
  }
  return true;
}

inline bool emit_report(const BenchmarkResult& r, const std::filesystem::path& dir,
                        std::ostream& log = std::cerr) {
  ensure_directory(dir);
  write_trials_jsonl(r.trials, (dir / "trials.jsonl").string());
  return emit_summary(r.summary, dir, log);
}

// Re-aggregates trials.jsonl; criteria and metrics are read off the records.
inline Summary summary_from_trials(const std::vector<TrialResult>& trials) {
  std::vector<std::string> criteria, metrics;
  for (const auto& t : trials) {
    for (const auto& c : t.checkpoints) {
      for (const auto& [k, v] : c.criteria) criteria.push_back(k);
      for (const auto& [k, v] : c.metrics) metrics.push_back(k);
    }
  }
  try {
    return aggregate(trials, criteria, metrics);
  } catch (const std::out_of_range&) {
    throw ValidationError("trials disagree on the recorded criteria or metrics");
  }
}

}  // namespace pubench::harness
