#pragma once

// Experiment configuration: a line-oriented "key = value" file.
//
//   # comment
//   seed = 7
//   dataset.source = synthetic
//   dataset.mean_pos = 1.4,0
//   algo = upu, upu-c, nnpu
//
// Unknown or repeated keys are errors. See README.md for the full key list.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pubench/classifier.hpp"
#include "pubench/data.hpp"
#include "pubench/error.hpp"
#include "pubench/loss.hpp"
#include "pubench/metrics.hpp"
#include "pubench/risk.hpp"
#include "pubench/selection.hpp"

namespace pubench::harness {

struct AlgorithmSpec {
  std::string name;
  EstimatorKind kind;
  bool pusb = false;  // nnPU training, then a prior-quantile decision threshold

  friend bool operator==(const AlgorithmSpec&, const AlgorithmSpec&) = default;
};

// upu | nnpu | nnpu-ga | pusb, each optionally suffixed "-c" for the
// replenished (calibrated) variant; upu-cdirect evaluates the calibrated formula
// directly.
inline AlgorithmSpec parse_algorithm(std::string_view token) {
  std::string_view base = token;
  AlgorithmSpec spec{std::string(token), {}, false};
  if (token == "upu-cdirect") {
    spec.kind = {BaseEstimator::Upu, true, true};
    return spec;
  }
  if (base.size() > 2 && base.substr(base.size() - 2) == "-c") {
    spec.kind.calibrated = true;
    base.remove_suffix(2);
  }
  if (base == "upu") {
    spec.kind.base = BaseEstimator::Upu;
  } else if (base == "nnpu") {
    spec.kind.base = BaseEstimator::Nnpu;
  } else if (base == "nnpu-ga") {
    spec.kind.base = BaseEstimator::NnpuGa;
  } else if (base == "pusb") {
    spec.kind.base = BaseEstimator::Nnpu;
    spec.pusb = true;
  } else {
    throw ValidationError("unknown algorithm '" + std::string(token) +
                          "' (expected upu|nnpu|nnpu-ga|pusb, optional -c suffix, or upu-cdirect)");
  }
  return spec;
}

enum class DataSource { Synthetic, Csv };

struct DatasetConfig {
  DataSource source = DataSource::Synthetic;
  // synthetic
  std::size_t dim = 2;
  Vector mean_pos{1.4, 0.0};
  Vector mean_neg{-1.4, 0.0};
  double scale_pos = 1.0;
  double scale_neg = 1.0;
  std::size_t n_test = 5000;
  // csv
  std::string path;
  double test_rate = 0.3;
  // sizes: TS uses n_p / n_u, OS uses n (synthetic) or the whole pool (csv)
  std::size_t n_p = 500;
  std::size_t n_u = 1500;
  std::size_t n = 2000;
};

// Parameter swept across runs, e.g. "c: 0.2, 0.4" or "n_p: 100, 200".
struct SweepConfig {
  std::string name;
  std::vector<double> values;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  DatasetConfig dataset;
  Setting setting = Setting::TS;
  double pi = 0.5;
  std::optional<double> c;
  double val_rate = 0.2;
  std::vector<AlgorithmSpec> algorithms{parse_algorithm("nnpu")};
  LossKind loss = LossKind::Logistic;
  Architecture model = Architecture::mlp(2, 32);
  double weight_decay = 1e-4;
  double tolerance = 0.0;
  double ascent_scale = 1.0;
  std::optional<double> learning_rate;   // fixes the draw instead of sampling it
  std::optional<std::size_t> batch_size; // likewise for the total batch size
  std::size_t iterations = 2000;
  std::size_t eval_every = 100;
  std::size_t splits = 3;
  std::size_t draws = 10;
  std::vector<Criterion> criteria{Criterion::Pa, Criterion::Pauc};
  std::vector<Metric> metrics{Metric::Acc, Metric::Auc, Metric::F1, Metric::Precision,
                              Metric::Recall};
  bool oracle_mode = false;
  std::string out = "out";
  std::size_t workers = 1;
  std::optional<SweepConfig> sweep;

  GaussianMixtureSpec mixture() const {
    return {dataset.dim, dataset.mean_pos, dataset.mean_neg, dataset.scale_pos,
            dataset.scale_neg, pi};
  }

  // The config with one sweep value applied.
  ExperimentConfig at_sweep(double value) const {
    ExperimentConfig cfg = *this;
    cfg.sweep.reset();
    const std::string& k = sweep->name;
    if (k == "c") {
      cfg.c = value;
    } else if (k == "pi") {
      cfg.pi = value;
    } else if (k == "n_p") {
      cfg.dataset.n_p = static_cast<std::size_t>(value);
    } else if (k == "n_u") {
      cfg.dataset.n_u = static_cast<std::size_t>(value);
    } else if (k == "n") {
      cfg.dataset.n = static_cast<std::size_t>(value);
    }
    return cfg;
  }

  void validate() const {
    require_prior(pi, "pi");
    if (setting == Setting::OS && !c && !(sweep && sweep->name == "c")) {
      throw ValidationError("setting = OS requires c");
    }
    if (c) require_label_frequency(*c);
    if (!(val_rate > 0.0 && val_rate < 1.0)) throw ValidationError("val_rate must lie in (0, 1)");
    if (algorithms.empty()) throw ValidationError("algo must name at least one algorithm");
    if (eval_every < 1) throw ValidationError("eval_every must be >= 1");
    if (iterations < eval_every) throw ValidationError("iterations must be >= eval_every");
    if (splits < 1) throw ValidationError("splits must be >= 1");
    if (draws < 1) throw ValidationError("draws must be >= 1");
    if (workers < 1) throw ValidationError("workers must be >= 1");
    if (criteria.empty()) throw ValidationError("criteria must not be empty");
    if (metrics.empty()) throw ValidationError("metrics must not be empty");
    for (Criterion cr : criteria) {
      if (cr == Criterion::Oa && !oracle_mode) {
        throw ValidationError("criterion oa needs oracle_mode = true");
      }
    }
    if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be >= 0");
    if (!(tolerance >= 0.0)) throw ValidationError("tolerance must be >= 0");
    if (learning_rate && !(*learning_rate > 0.0)) throw ValidationError("lr must be > 0");
    if (batch_size && *batch_size < 2) throw ValidationError("batch must be >= 2");
    if (dataset.source == DataSource::Synthetic) {
      mixture().validate();
      if (dataset.n_test < 1) throw ValidationError("dataset.n_test must be >= 1");
    } else {
      if (dataset.path.empty()) throw ValidationError("dataset.source = csv needs dataset.path");
      if (!(dataset.test_rate > 0.0 && dataset.test_rate < 1.0)) {
        throw ValidationError("dataset.test_rate must lie in (0, 1)");
      }
    }
    if (model.input_dim < 1) throw ValidationError("model input dimension must be >= 1");
    if (sweep) {
      static const std::vector<std::string> names{"c", "pi", "n_p", "n_u", "n"};
      if (std::find(names.begin(), names.end(), sweep->name) == names.end()) {
        throw ValidationError("sweep parameter must be one of c|pi|n_p|n_u|n");
      }
      if (sweep->values.empty()) throw ValidationError("sweep needs at least one value");
      for (double v : sweep->values) at_sweep(v).validate();
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos
                                                                              : comma - start));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

class Reader {
 public:
  Reader(std::string_view key, std::string_view value, std::size_t line)
      : key_(key), value_(value), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("config line " + std::to_string(line_) + " (" + std::string(key_) +
                          "): " + what);
  }

  double real(std::string_view s) const {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
      fail("not a number: '" + std::string(s) + "'");
    }
    return v;
  }
  double real() const { return real(value_); }

  std::uint64_t count(std::string_view s) const {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
      fail("not a non-negative integer: '" + std::string(s) + "'");
    }
    return v;
  }
  std::uint64_t count() const { return count(value_); }

  bool flag() const {
    if (value_ == "true" || value_ == "1") return true;
    if (value_ == "false" || value_ == "0") return false;
    fail("expected true or false");
  }

  Vector reals() const {
    Vector out;
    for (auto piece : split_list(value_)) out.push_back(real(piece));
    if (out.empty()) fail("empty list");
    return out;
  }

  template <typename F>
  auto tokens(F&& parse) const {
    std::vector<decltype(parse(std::string_view{}))> out;
    try {
      for (auto piece : split_list(value_)) out.push_back(parse(piece));
    } catch (const ValidationError& e) {
      fail(e.what());
    }
    if (out.empty()) fail("empty list");
    return out;
  }

  template <typename F>
  auto token(F&& parse) const {
    try {
      return parse(value_);
    } catch (const ValidationError& e) {
      fail(e.what());
    }
  }

  std::string_view value() const { return value_; }

 private:
  std::string_view key_, value_;
  std::size_t line_;
};

inline Architecture parse_model(std::string_view v, std::size_t dim) {
  if (v == "linear") return Architecture::linear(dim);
  if (v.substr(0, 4) == "mlp:") {
    std::size_t h = 0;
    const auto rest = v.substr(4);
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), h);
    if (res.ec == std::errc() && res.ptr == rest.data() + rest.size() && h >= 1) {
      return Architecture::mlp(dim, h);
    }
  }
  throw ValidationError("model must be 'linear' or 'mlp:<hidden>'");
}

}  // namespace detail

// Parses config text. The model input dimension is filled in from
// dataset.dim here and from the CSV header when the data are loaded.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string model_token = "mlp:32";
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != line.npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == line.npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
      throw ValidationError("config line " + std::to_string(line_no) + ": key '" + key +
                            "' already set on line " + std::to_string(it->second));
    }
    const detail::Reader r(key, value, line_no);
    auto& ds = cfg.dataset;
    if (key == "seed") {
      cfg.seed = r.count();
    } else if (key == "dataset.source") {
      if (value == "synthetic") {
        ds.source = DataSource::Synthetic;
      } else if (value == "csv") {
        ds.source = DataSource::Csv;
      } else {
        r.fail("expected synthetic or csv");
      }
    } else if (key == "dataset.dim") {
      ds.dim = r.count();
    } else if (key == "dataset.mean_pos") {
      ds.mean_pos = r.reals();
    } else if (key == "dataset.mean_neg") {
      ds.mean_neg = r.reals();
    } else if (key == "dataset.scale_pos") {
      ds.scale_pos = r.real();
    } else if (key == "dataset.scale_neg") {
      ds.scale_neg = r.real();
    } else if (key == "dataset.path") {
      ds.path = std::string(value);
    } else if (key == "dataset.test_rate") {
      ds.test_rate = r.real();
    } else if (key == "dataset.n_p") {
      ds.n_p = r.count();
    } else if (key == "dataset.n_u") {
      ds.n_u = r.count();
    } else if (key == "dataset.n") {
      ds.n = r.count();
    } else if (key == "dataset.n_test") {
      ds.n_test = r.count();
    } else if (key == "setting") {
      cfg.setting = r.token(parse_setting);
    } else if (key == "pi") {
      cfg.pi = r.real();
    } else if (key == "c") {
      cfg.c = r.real();
    } else if (key == "val_rate") {
      cfg.val_rate = r.real();
    } else if (key == "algo") {
      cfg.algorithms = r.tokens(parse_algorithm);
    } else if (key == "loss") {
      cfg.loss = r.token(parse_loss);
    } else if (key == "model") {
      model_token = std::string(value);
    } else if (key == "weight_decay") {
      cfg.weight_decay = r.real();
    } else if (key == "tolerance") {
      cfg.tolerance = r.real();
    } else if (key == "ascent_scale") {
      cfg.ascent_scale = r.real();
    } else if (key == "lr") {
      cfg.learning_rate = r.real();
    } else if (key == "batch") {
      cfg.batch_size = r.count();
    } else if (key == "iterations") {
      cfg.iterations = r.count();
    } else if (key == "eval_every") {
      cfg.eval_every = r.count();
    } else if (key == "splits") {
      cfg.splits = r.count();
    } else if (key == "draws") {
      cfg.draws = r.count();
    } else if (key == "criteria") {
      cfg.criteria = r.tokens(parse_criterion);
    } else if (key == "metrics") {
      cfg.metrics = r.tokens(parse_metric);
    } else if (key == "oracle_mode") {
      cfg.oracle_mode = r.flag();
    } else if (key == "out") {
      cfg.out = std::string(value);
    } else if (key == "workers") {
      cfg.workers = r.count();
    } else if (key == "sweep") {
      const auto colon = value.find(':');
      if (colon == value.npos) r.fail("expected name: v1, v2, ...");
      SweepConfig sw;
      sw.name = std::string(detail::trim(value.substr(0, colon)));
      for (auto piece : detail::split_list(value.substr(colon + 1))) {
        sw.values.push_back(r.real(piece));
      }
      cfg.sweep = std::move(sw);
    } else {
      r.fail("unknown key");
    }
  }
  try {
    cfg.model = detail::parse_model(model_token, cfg.dataset.dim);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("config (model): ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace pubench::harness
