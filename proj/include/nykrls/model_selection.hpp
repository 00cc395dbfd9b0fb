#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "nykrls/dataset.hpp"
#include "nykrls/diagnostics.hpp"
#include "nykrls/incremental.hpp"
#include "nykrls/solvers.hpp"
#include "nykrls/subsampling.hpp"

namespace nykrls {

enum class Metric { Rmse, ZeroOne };

// Hold-out grid search over (lambda, m). Within a trial one landmark sequence
// of max(m_grid) points is drawn and every lambda walks the same sequence
// incrementally, so a cell costs one factor update instead of a fresh fit.
struct GridSpec {
  std::vector<double> lambda_grid;  // ascending, positive
  std::vector<int> m_grid;          // ascending, at least 1
  double holdout_fraction = 0.2;
  int trials = 1;
  std::uint64_t base_seed = 0;
};

// How landmarks are drawn, shared by every stage that samples.
struct LandmarkStrategy {
  SamplingStrategy kind = SamplingStrategy::PlainUniform;
  // LeverageWeighted only: ridge level for the scores, and whether they are
  // computed exactly or against a uniform sketch of sketch_size points.
  double score_t = 1e-2;
  bool approximate_scores = false;
  Eigen::Index sketch_size = 0;
  Eigen::Index dense_cap = kDefaultDenseCap;
};

struct GridCell {
  int m = 0;
  double lambda = 0.0;
  int trial = 0;
  double validation_error = 0.0;
  double fit_seconds = 0.0;  // cumulative path time up to this cell's level
};

struct GridReport {
  // Ordered by (trial, lambda index, m index); identical across runs and
  // thread counts except for fit_seconds.
  std::vector<GridCell> cells;
  int winner_m = 0;
  double winner_lambda = 0.0;
  double best_mean_error = 0.0;
  // Hold-out winner retrained per trial on the full training part and scored
  // on the test set when one is given.
  std::vector<double> test_per_trial;
  double test_mean = 0.0;
  double test_std = 0.0;
  long long recoveries = 0;
  std::optional<NystromModel> winner_model;  // trial 0 retrain
  std::vector<EffectiveDimension> effdim;    // optional per-lambda metadata
};

struct GridRunOptions {
  int threads = 1;
  // Attach the effective dimension of the first trial's training split at
  // every lambda in the grid (subject to the strategy's dense cap).
  bool effdim_metadata = false;
};

GridReport run_grid(const Dataset& train, const Dataset* test, const KernelSpec& kernel,
                    const GridSpec& spec, const LandmarkStrategy& strategy,
                    Metric metric, const GridRunOptions& options = {});

// Subsampling level as the only regularization knob: lambda is a function of
// m. A null coupling uses log(m) / m, clamped below at lambda_floor.
using Coupling = std::function<double(int)>;

struct MRegSpec {
  std::vector<int> m_grid;  // ascending, at least 1
  double holdout_fraction = 0.2;
  int trials = 1;
  std::uint64_t base_seed = 0;
  double lambda_floor = 1e-15;
};

GridReport run_m_regularized(const Dataset& train, const Dataset* test,
                             const KernelSpec& kernel, const MRegSpec& spec,
                             const Coupling& coupling, const LandmarkStrategy& strategy,
                             Metric metric, const GridRunOptions& options = {});

// Mean metric of the model on a labeled set. ZeroOne requires labels in
// {-1, +1} and classifies by the sign of the prediction, with sign(0) = +1.
double evaluate(const NystromModel& model, const Dataset& data, Metric metric,
                int threads = 1);

// Same metric on precomputed predictions.
double evaluate_predictions(const Eigen::Ref<const Eigen::VectorXd>& predictions,
                            const Eigen::Ref<const Eigen::VectorXd>& targets,
                            Metric metric);

}  // namespace nykrls
