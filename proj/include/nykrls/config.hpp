#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nykrls/kernels.hpp"
#include "nykrls/model_selection.hpp"

namespace nykrls {

// Experiment description as read from a JSON config file. Parsing fills every
// default and expands axis shorthands, so serializing the parsed config back
// out pins the exact experiment that ran.
struct DatasetConfig {
  std::string train_csv;
  std::optional<std::string> test_csv;
  int target_column = -1;
  char delimiter = ',';
  bool header = false;
  bool standardize = true;
};

struct StrategyConfig {
  SamplingStrategy kind = SamplingStrategy::PlainUniform;
  double score_t = 1e-2;
  bool approximate_scores = false;
  Eigen::Index sketch_size = 0;
};

struct GridConfig {
  std::vector<double> lambdas;  // resolved, ascending
  std::vector<int> ms;          // resolved, ascending
  double holdout_fraction = 0.2;
  int trials = 1;
  bool coupled = false;  // true: lambda follows log(m)/m and the lambda axis is ignored
  double lambda_floor = 1e-15;
  bool effdim_metadata = false;
};

struct PathCommandConfig {
  int m = 10;
  double lambda = 1e-6;
  int level_stride = 1;          // emit every k-th level
  double holdout_fraction = 0.0; // > 0: report hold-out error per level
};

struct ScoresCommandConfig {
  double t = 1e-2;
  bool approximate = false;
  Eigen::Index sketch_size = 0;
  bool measure_factor = false;
};

struct EffdimCommandConfig {
  std::vector<double> lambdas;  // resolved, ascending
};

struct ExperimentConfig {
  DatasetConfig dataset;
  KernelSpec kernel;
  StrategyConfig strategy;
  GridConfig grid;
  PathCommandConfig path;
  ScoresCommandConfig scores;
  EffdimCommandConfig effdim;
  Metric metric = Metric::Rmse;
  std::uint64_t seed = 0;
  int threads = 1;
  Eigen::Index dense_cap = kDefaultDenseCap;
};

// Throws ConfigError on unknown values, bad ranges, or malformed axes.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Resolved round-trip form: defaults filled, axes expanded to explicit lists.
nlohmann::json config_to_json(const ExperimentConfig& config);

}  // namespace nykrls
