#include "nykrls/config.hpp"

#include <cmath>
#include <fstream>

namespace nykrls {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void check_keys(const json& obj, const char* where,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(std::string(where) + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail(std::string(where) + ": unknown key '" + it.key() + "'");
  }
}

double num_or(const json& o, const char* key, double def, const char* where) {
  if (!o.contains(key)) return def;
  if (!o.at(key).is_number()) fail(std::string(where) + "." + key + ": expected a number");
  return o.at(key).get<double>();
}

long long int_or(const json& o, const char* key, long long def, const char* where) {
  if (!o.contains(key)) return def;
  if (!o.at(key).is_number_integer())
    fail(std::string(where) + "." + key + ": expected an integer");
  return o.at(key).get<long long>();
}

bool bool_or(const json& o, const char* key, bool def, const char* where) {
  if (!o.contains(key)) return def;
  if (!o.at(key).is_boolean()) fail(std::string(where) + "." + key + ": expected a boolean");
  return o.at(key).get<bool>();
}

std::string str_or(const json& o, const char* key, const std::string& def,
                   const char* where) {
  if (!o.contains(key)) return def;
  if (!o.at(key).is_string()) fail(std::string(where) + "." + key + ": expected a string");
  return o.at(key).get<std::string>();
}

// Lambda axis: either {"values": [...]} or a log-spaced {"min", "max", "count"}.
std::vector<double> parse_log_axis(const json& o, const char* where) {
  std::vector<double> out;
  if (o.contains("values")) {
    check_keys(o, where, {"values"});
    if (!o.at("values").is_array()) fail(std::string(where) + ".values: expected an array");
    for (const auto& v : o.at("values")) {
      if (!v.is_number()) fail(std::string(where) + ".values: expected numbers");
      out.push_back(v.get<double>());
    }
  } else {
    check_keys(o, where, {"min", "max", "count"});
    const double lo = num_or(o, "min", 0.0, where);
    const double hi = num_or(o, "max", 0.0, where);
    const long long count = int_or(o, "count", 0, where);
    if (!(lo > 0.0) || !(hi >= lo)) fail(std::string(where) + ": need 0 < min <= max");
    if (count < 1) fail(std::string(where) + ": count must be at least 1");
    if (count == 1) {
      out.push_back(lo);
    } else {
      const double llo = std::log(lo), lhi = std::log(hi);
      for (long long i = 0; i < count; ++i)
        out.push_back(std::exp(llo + (lhi - llo) * static_cast<double>(i) /
                                         static_cast<double>(count - 1)));
      out.front() = lo;  // pin both endpoints against exp/log rounding
      out.back() = hi;
    }
  }
  double prev = 0.0;
  for (double v : out) {
    if (!(v > prev)) fail(std::string(where) + ": values must be positive and strictly ascending");
    prev = v;
  }
  return out;
}

// m axis: {"values": [...]} or a linearly spaced {"min", "max", "count"};
// rounded values that collide are merged.
std::vector<int> parse_linear_axis(const json& o, const char* where) {
  std::vector<int> out;
  if (o.contains("values")) {
    check_keys(o, where, {"values"});
    if (!o.at("values").is_array()) fail(std::string(where) + ".values: expected an array");
    for (const auto& v : o.at("values")) {
      if (!v.is_number_integer()) fail(std::string(where) + ".values: expected integers");
      out.push_back(v.get<int>());
    }
  } else {
    check_keys(o, where, {"min", "max", "count"});
    const long long lo = int_or(o, "min", 0, where);
    const long long hi = int_or(o, "max", 0, where);
    const long long count = int_or(o, "count", 0, where);
    if (lo < 1 || hi < lo) fail(std::string(where) + ": need 1 <= min <= max");
    if (count < 1) fail(std::string(where) + ": count must be at least 1");
    if (count == 1) {
      out.push_back(static_cast<int>(lo));
    } else {
      for (long long i = 0; i < count; ++i) {
        const double v = static_cast<double>(lo) +
                         static_cast<double>(hi - lo) * static_cast<double>(i) /
                             static_cast<double>(count - 1);
        const int r = static_cast<int>(std::llround(v));
        if (out.empty() || r > out.back()) out.push_back(r);
      }
    }
  }
  int prev = 0;
  for (int v : out) {
    if (v <= prev) fail(std::string(where) + ": values must be positive and strictly ascending");
    prev = v;
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  check_keys(j, "top level",
             {"dataset", "kernel", "strategy", "grid", "path", "scores", "effdim",
              "metric", "seed", "threads", "dense_cap"});
  ExperimentConfig c;

  if (!j.contains("dataset")) fail("missing required 'dataset' section");
  const json& d = j.at("dataset");
  check_keys(d, "dataset",
             {"train_csv", "test_csv", "target_column", "delimiter", "header",
              "standardize"});
  c.dataset.train_csv = str_or(d, "train_csv", "", "dataset");
  if (c.dataset.train_csv.empty()) fail("dataset.train_csv is required");
  if (d.contains("test_csv") && !d.at("test_csv").is_null())
    c.dataset.test_csv = str_or(d, "test_csv", "", "dataset");
  c.dataset.target_column =
      static_cast<int>(int_or(d, "target_column", -1, "dataset"));
  const std::string delim = str_or(d, "delimiter", ",", "dataset");
  if (delim.size() != 1) fail("dataset.delimiter must be a single character");
  c.dataset.delimiter = delim[0];
  c.dataset.header = bool_or(d, "header", false, "dataset");
  c.dataset.standardize = bool_or(d, "standardize", true, "dataset");

  if (j.contains("kernel")) {
    const json& k = j.at("kernel");
    check_keys(k, "kernel", {"family", "sigma"});
    const std::string family = str_or(k, "family", "gaussian", "kernel");
    if (family != "gaussian") fail("kernel.family: unknown family '" + family + "'");
    c.kernel.family = KernelFamily::Gaussian;
    c.kernel.sigma = num_or(k, "sigma", 1.0, "kernel");
    if (!(std::isfinite(c.kernel.sigma) && c.kernel.sigma > 0.0))
      fail("kernel.sigma must be finite and positive");
  }

  if (j.contains("strategy")) {
    const json& s = j.at("strategy");
    check_keys(s, "strategy", {"kind", "t", "scores", "sketch_size"});
    const std::string kind = str_or(s, "kind", "plain", "strategy");
    if (kind == "plain")
      c.strategy.kind = SamplingStrategy::PlainUniform;
    else if (kind == "leverage")
      c.strategy.kind = SamplingStrategy::LeverageWeighted;
    else
      fail("strategy.kind: expected 'plain' or 'leverage', got '" + kind + "'");
    c.strategy.score_t = num_or(s, "t", 1e-2, "strategy");
    if (!(c.strategy.score_t > 0.0)) fail("strategy.t must be positive");
    const std::string mode = str_or(s, "scores", "exact", "strategy");
    if (mode == "exact")
      c.strategy.approximate_scores = false;
    else if (mode == "approx")
      c.strategy.approximate_scores = true;
    else
      fail("strategy.scores: expected 'exact' or 'approx', got '" + mode + "'");
    c.strategy.sketch_size = int_or(s, "sketch_size", 0, "strategy");
    if (c.strategy.approximate_scores && c.strategy.sketch_size < 1)
      fail("strategy.sketch_size must be at least 1 for approximate scores");
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, "grid",
               {"lambda", "m", "holdout_fraction", "trials", "coupled",
                "lambda_floor", "effdim_metadata"});
    c.grid.coupled = bool_or(g, "coupled", false, "grid");
    if (g.contains("lambda"))
      c.grid.lambdas = parse_log_axis(g.at("lambda"), "grid.lambda");
    else if (!c.grid.coupled)
      fail("grid.lambda is required unless grid.coupled is true");
    if (!g.contains("m")) fail("grid.m is required");
    c.grid.ms = parse_linear_axis(g.at("m"), "grid.m");
    c.grid.holdout_fraction = num_or(g, "holdout_fraction", 0.2, "grid");
    if (!(c.grid.holdout_fraction > 0.0 && c.grid.holdout_fraction < 1.0))
      fail("grid.holdout_fraction must lie in (0, 1)");
    c.grid.trials = static_cast<int>(int_or(g, "trials", 1, "grid"));
    if (c.grid.trials < 1) fail("grid.trials must be at least 1");
    c.grid.lambda_floor = num_or(g, "lambda_floor", 1e-15, "grid");
    if (!(c.grid.lambda_floor > 0.0)) fail("grid.lambda_floor must be positive");
    c.grid.effdim_metadata = bool_or(g, "effdim_metadata", false, "grid");
  }

  if (j.contains("path")) {
    const json& p = j.at("path");
    check_keys(p, "path", {"m", "lambda", "level_stride", "holdout_fraction"});
    c.path.m = static_cast<int>(int_or(p, "m", 10, "path"));
    if (c.path.m < 1) fail("path.m must be at least 1");
    c.path.lambda = num_or(p, "lambda", 1e-6, "path");
    if (!(c.path.lambda > 0.0)) fail("path.lambda must be positive");
    c.path.level_stride = static_cast<int>(int_or(p, "level_stride", 1, "path"));
    if (c.path.level_stride < 1) fail("path.level_stride must be at least 1");
    c.path.holdout_fraction = num_or(p, "holdout_fraction", 0.0, "path");
    if (!(c.path.holdout_fraction >= 0.0 && c.path.holdout_fraction < 1.0))
      fail("path.holdout_fraction must lie in [0, 1)");
  }

  if (j.contains("scores")) {
    const json& s = j.at("scores");
    check_keys(s, "scores", {"t", "mode", "sketch_size", "measure_factor"});
    c.scores.t = num_or(s, "t", 1e-2, "scores");
    if (!(c.scores.t > 0.0)) fail("scores.t must be positive");
    const std::string mode = str_or(s, "mode", "exact", "scores");
    if (mode == "exact")
      c.scores.approximate = false;
    else if (mode == "approx")
      c.scores.approximate = true;
    else
      fail("scores.mode: expected 'exact' or 'approx', got '" + mode + "'");
    c.scores.sketch_size = int_or(s, "sketch_size", 0, "scores");
    if (c.scores.approximate && c.scores.sketch_size < 1)
      fail("scores.sketch_size must be at least 1 for approximate scores");
    c.scores.measure_factor = bool_or(s, "measure_factor", false, "scores");
  }

  if (j.contains("effdim")) {
    const json& e = j.at("effdim");
    if (e.contains("values") || e.contains("min"))
      c.effdim.lambdas = parse_log_axis(e, "effdim");
    else {
      check_keys(e, "effdim", {"lambda"});
      if (!e.contains("lambda")) fail("effdim: expected 'lambda' axis or values/min axis keys");
      c.effdim.lambdas = parse_log_axis(e.at("lambda"), "effdim.lambda");
    }
  }

  const std::string metric = str_or(j, "metric", "rmse", "top level");
  if (metric == "rmse")
    c.metric = Metric::Rmse;
  else if (metric == "zero_one")
    c.metric = Metric::ZeroOne;
  else
    fail("metric: expected 'rmse' or 'zero_one', got '" + metric + "'");

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer()) fail("seed: expected an integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  c.threads = static_cast<int>(int_or(j, "threads", 1, "top level"));
  if (c.threads < 1) fail("threads must be at least 1");
  c.dense_cap = int_or(j, "dense_cap", kDefaultDenseCap, "top level");
  if (c.dense_cap < 1) fail("dense_cap must be at least 1");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["dataset"]["train_csv"] = c.dataset.train_csv;
  if (c.dataset.test_csv)
    j["dataset"]["test_csv"] = *c.dataset.test_csv;
  else
    j["dataset"]["test_csv"] = nullptr;
  j["dataset"]["target_column"] = c.dataset.target_column;
  j["dataset"]["delimiter"] = std::string(1, c.dataset.delimiter);
  j["dataset"]["header"] = c.dataset.header;
  j["dataset"]["standardize"] = c.dataset.standardize;
  j["kernel"]["family"] = "gaussian";
  j["kernel"]["sigma"] = c.kernel.sigma;
  j["strategy"]["kind"] =
      c.strategy.kind == SamplingStrategy::PlainUniform ? "plain" : "leverage";
  j["strategy"]["t"] = c.strategy.score_t;
  j["strategy"]["scores"] = c.strategy.approximate_scores ? "approx" : "exact";
  j["strategy"]["sketch_size"] = c.strategy.sketch_size;
  j["grid"]["lambda"]["values"] = c.grid.lambdas;
  j["grid"]["m"]["values"] = c.grid.ms;
  j["grid"]["holdout_fraction"] = c.grid.holdout_fraction;
  j["grid"]["trials"] = c.grid.trials;
  j["grid"]["coupled"] = c.grid.coupled;
  j["grid"]["lambda_floor"] = c.grid.lambda_floor;
  j["grid"]["effdim_metadata"] = c.grid.effdim_metadata;
  j["path"]["m"] = c.path.m;
  j["path"]["lambda"] = c.path.lambda;
  j["path"]["level_stride"] = c.path.level_stride;
  j["path"]["holdout_fraction"] = c.path.holdout_fraction;
  j["scores"]["t"] = c.scores.t;
  j["scores"]["mode"] = c.scores.approximate ? "approx" : "exact";
  j["scores"]["sketch_size"] = c.scores.sketch_size;
  j["scores"]["measure_factor"] = c.scores.measure_factor;
  j["effdim"]["lambda"]["values"] = c.effdim.lambdas;
  j["metric"] = c.metric == Metric::Rmse ? "rmse" : "zero_one";
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["dense_cap"] = c.dense_cap;
  return j;
}

}  // namespace nykrls
