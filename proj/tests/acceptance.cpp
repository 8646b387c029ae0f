// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria (capped at 1 for ctest).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "pubench/checks.hpp"

namespace fs = std::filesystem;
using pubench::checks::CheckResult;

namespace {

const char* kDeterminismConfig =
    "seed = 4242\nsetting = OS\nc = 0.5\npi = 0.4\ndataset.n = 1200\ndataset.n_test = 1000\n"
    "algo = upu, upu-c, nnpu, nnpu-ga-c, pusb\nmodel = mlp:8\niterations = 300\n"
    "eval_every = 100\nsplits = 3\ndraws = 2\noracle_mode = true\ncriteria = pa, pauc, oa\n";

// Criterion 11 through the command-line tool: two `bench` runs, 1 and 4
// workers, compared byte for byte.
CheckResult cli_determinism(const std::string& cli, const fs::path& scratch) {
  const fs::path cfg = scratch / "determinism.cfg";
  pubench::harness::write_text(kDeterminismConfig, cfg);
  std::string sizes;
  for (const char* w : {"1", "4"}) {
    const std::string cmd = "\"" + cli + "\" bench --config \"" + cfg.string() + "\" --out \"" +
                            (scratch / ("cli_w" + std::string(w))).string() + "\" --workers " + w +
                            " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      return {11, "harness-determinism", false, "bench exited nonzero: " + cmd};
    }
  }
  const auto a = pubench::checks::detail::read_file(scratch / "cli_w1" / "summary.csv");
  const auto b = pubench::checks::detail::read_file(scratch / "cli_w4" / "summary.csv");
  return {11, "harness-determinism", !a.empty() && a == b,
          pubench::checks::detail::fmt(
              "pubench bench: summary.csv %zu bytes (1 worker) vs %zu bytes (4 workers), %s",
              a.size(), b.size(), a == b ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }
  const fs::path scratch = fs::temp_directory_path() / "pubench_acceptance";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  int failed = 0;
  auto print = [&](const CheckResult& r) {
    std::printf("%s  #%-2d %-26s %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str());
    std::fflush(stdout);
    failed += !r.pass;
  };
  const auto t0 = std::chrono::steady_clock::now();
  pubench::checks::CheckOptions opts;
  auto results = pubench::checks::run_all(opts, scratch, [&](const CheckResult& r) {
    if (r.id == 11 && !cli.empty()) return;
    print(r);
  });
  if (!cli.empty()) print(cli_determinism(cli, scratch));
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of 11 criteria failed (%.1f s)\n", failed, secs);
  fs::remove_all(scratch);
  return failed == 0 ? 0 : 1;
}
