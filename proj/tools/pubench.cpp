// pubench: synth | bench | report | check
//
// Exit codes: 0 success, 1 validation failure (bad config, bad data, failed
// check), 2 I/O error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pubench/checks.hpp"
#include "pubench/csv.hpp"
#include "pubench/harness/report.hpp"

namespace fs = std::filesystem;
using namespace pubench;

namespace {

int cmd_synth(const std::string& spec_path, const std::string& out, std::size_t split,
              std::optional<double> sweep_value) {
  auto cfg = harness::load_config(spec_path);
  if (cfg.sweep) {
    const double v = sweep_value.value_or(cfg.sweep->values.front());
    std::cout << "using " << cfg.sweep->name << " = " << csv::format_double(v) << '\n';
    cfg = cfg.at_sweep(v);
    cfg.validate();
  } else if (sweep_value) {
    throw ValidationError("--sweep-value given but the config has no sweep");
  }
  std::optional<LabeledDataset> pool;
  if (cfg.dataset.source == harness::DataSource::Csv) pool = csv::load_labeled(cfg.dataset.path);
  const auto data = harness::prepare_split(cfg, split, pool ? &*pool : nullptr);
  harness::ensure_directory(out);
  csv::save_pu(data.pu.train, (fs::path(out) / "train.csv").string());
  csv::save_pu(data.pu.validation, (fs::path(out) / "validation.csv").string());
  csv::save_labeled(data.test, (fs::path(out) / "test.csv").string());
  std::cout << "wrote train.csv (n_P=" << data.pu.train.n_positive()
            << ", n_U=" << data.pu.train.n_unlabeled()
            << "), validation.csv (n_P=" << data.pu.validation.n_positive()
            << ", n_U=" << data.pu.validation.n_unlabeled() << "), test.csv (n="
            << data.test.size() << ") to " << out << '\n';
  return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_override,
              std::size_t workers) {
  auto cfg = harness::load_config(config_path);
  if (!out_override.empty()) cfg.out = out_override;
  if (workers > 0) cfg.workers = workers;
  const auto result = harness::run_benchmark(cfg);
  harness::emit_report(result, cfg.out);
  std::cout << harness::render_summary_csv(result.summary);
  return 0;
}

int cmd_report(const std::string& trials, const std::string& out) {
  const auto summary = harness::summary_from_trials(harness::read_trials_jsonl(trials));
  harness::emit_summary(summary, out);
  std::cout << harness::render_summary_csv(summary);
  return 0;
}

int cmd_check(bool fast, std::uint64_t seed) {
  checks::CheckOptions opts{fast, seed};
  const fs::path scratch = fs::temp_directory_path() / "pubench_check";
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  int failed = 0;
  checks::run_all(opts, scratch, [&](const checks::CheckResult& r) {
    std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name << ": " << r.detail << std::endl;
    failed += !r.pass;
  });
  fs::remove_all(scratch);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive-unlabeled learning benchmark"};
  app.require_subcommand(1);

  std::string spec_path, synth_out;
  std::size_t split = 0;
  auto* synth = app.add_subcommand("synth", "Write the train/validation/test data of one split");
  synth->add_option("--spec", spec_path, "Config file describing the data")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--split", split, "Split index (default 0)");
  std::optional<double> sweep_value;
  synth->add_option("--sweep-value", sweep_value, "Sweep value to apply (default: the first)");

  std::string config_path, bench_out;
  std::size_t workers = 0;
  auto* bench = app.add_subcommand("bench", "Run a benchmark and write its report");
  bench->add_option("--config", config_path, "Config file")->required();
  bench->add_option("--out", bench_out, "Output directory (overrides the config's out)");
  bench->add_option("--workers", workers, "Worker threads (overrides the config)");

  std::string trials_path, report_out;
  auto* report = app.add_subcommand("report", "Re-aggregate trials.jsonl into summary.csv");
  report->add_option("--trials", trials_path, "trials.jsonl")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  bool fast = false;
  std::uint64_t seed = checks::CheckOptions{}.seed;
  auto* check = app.add_subcommand("check", "Run the property checks of every module");
  check->add_flag("--fast", fast, "Smaller samples; skips the end-to-end checks");
  check->add_option("--seed", seed, "Seed for the checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth) return cmd_synth(spec_path, synth_out, split, sweep_value);
    if (*bench) return cmd_bench(config_path, bench_out, workers);
    if (*report) return cmd_report(trials_path, report_out);
    if (*check) return cmd_check(fast, seed);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
