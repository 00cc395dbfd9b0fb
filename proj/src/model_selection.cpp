#include "nykrls/model_selection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nykrls/parallel.hpp"
#include "nykrls/rng.hpp"

namespace nykrls {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct TrialSplit {
  Eigen::MatrixXd xt;
  Eigen::VectorXd yt;
  Eigen::MatrixXd xv;
  Eigen::VectorXd yv;
};

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x,
                            const std::vector<Eigen::Index>& idx, std::size_t begin,
                            std::size_t end) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), x.cols());
  for (std::size_t i = begin; i < end; ++i)
    out.row(static_cast<Eigen::Index>(i - begin)) = x.row(idx[i]);
  return out;
}

Eigen::VectorXd gather_entries(const Eigen::VectorXd& y,
                               const std::vector<Eigen::Index>& idx, std::size_t begin,
                               std::size_t end) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i)
    out(static_cast<Eigen::Index>(i - begin)) = y(idx[i]);
  return out;
}

TrialSplit make_split(const Dataset& train, double holdout, std::uint64_t base_seed,
                      int trial) {
  const Eigen::Index n = train.size();
  Eigen::Index nv = static_cast<Eigen::Index>(std::llround(holdout * static_cast<double>(n)));
  nv = std::max<Eigen::Index>(1, std::min(nv, n - 1));
  const Eigen::Index nt = n - nv;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(substream_seed(base_seed, kSplitStream, static_cast<std::uint64_t>(trial)));
  shuffle(perm, rng);
  TrialSplit split;
  split.xt = gather_rows(train.x, perm, 0, static_cast<std::size_t>(nt));
  split.yt = gather_entries(train.y, perm, 0, static_cast<std::size_t>(nt));
  split.xv = gather_rows(train.x, perm, static_cast<std::size_t>(nt),
                         static_cast<std::size_t>(n));
  split.yv = gather_entries(train.y, perm, static_cast<std::size_t>(nt),
                            static_cast<std::size_t>(n));
  return split;
}

// Draws a landmark sequence from x for one stage of one trial. stage_seed
// already encodes (base_seed, stage, trial); the score sketch, when used,
// derives its pilot seed from it so stages stay independent.
LandmarkSample draw_landmarks(const Eigen::MatrixXd& x, const KernelSpec& kernel,
                              const LandmarkStrategy& strategy, Eigen::Index m,
                              std::uint64_t stage_seed, int threads) {
  if (strategy.kind == SamplingStrategy::PlainUniform)
    return sample_landmarks(plain_uniform_plan(m, stage_seed), x);
  LeverageScores scores;
  if (strategy.approximate_scores) {
    const Eigen::Index sketch = std::min<Eigen::Index>(strategy.sketch_size, x.rows());
    scores = leverage_scores_approx(x, kernel, strategy.score_t, sketch,
                                    substream_seed(stage_seed, kScoreStream), {},
                                    threads);
  } else {
    scores = leverage_scores_exact(x, kernel, strategy.score_t, strategy.dense_cap,
                                   threads);
  }
  return sample_landmarks(leverage_weighted_plan(scores, m, stage_seed), x);
}

void check_strategy(const LandmarkStrategy& strategy) {
  if (strategy.kind == SamplingStrategy::LeverageWeighted) {
    if (!(strategy.score_t > 0.0))
      throw InputError("landmark strategy: score_t must be positive");
    if (strategy.approximate_scores && strategy.sketch_size < 1)
      throw InputError("landmark strategy: sketch_size must be at least 1");
  }
}

void check_common(Eigen::Index n, const std::vector<int>& m_grid, double holdout,
                  int trials) {
  if (n < 2) throw InputError("grid: need at least two training points");
  if (m_grid.empty()) throw InputError("grid: empty m grid");
  int prev_m = 0;
  for (int m : m_grid) {
    if (m <= prev_m)
      throw InputError("grid: m grid must be strictly ascending and positive");
    prev_m = m;
  }
  if (!(holdout > 0.0 && holdout < 1.0))
    throw InputError("grid: holdout fraction must lie in (0, 1)");
  if (trials < 1) throw InputError("grid: trials must be at least 1");
}

void check_labels_for_metric(const Eigen::VectorXd& y, Metric metric) {
  if (metric != Metric::ZeroOne) return;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 1.0 && y(i) != -1.0)
      throw InputError("zero-one metric requires labels in {-1, +1}; found " +
                       std::to_string(y(i)) + " at row " + std::to_string(i));
}

// Levels each requested m maps to on a sequence of length `len` (weighted
// draws can come up short after duplicate removal; such cells reuse the
// deepest available level).
std::vector<Eigen::Index> clamp_levels(const std::vector<int>& m_grid,
                                       Eigen::Index len) {
  std::vector<Eigen::Index> out(m_grid.size());
  for (std::size_t i = 0; i < m_grid.size(); ++i)
    out[i] = std::min<Eigen::Index>(m_grid[i], len);
  return out;
}

struct RetrainOutcome {
  std::vector<double> per_trial;
  double mean = 0.0;
  double stdev = 0.0;
  std::optional<NystromModel> first_model;
};

// Retrains the winning configuration on the full training part for every
// trial and scores it on the test set when present.
RetrainOutcome retrain_winner(const Dataset& train, const Dataset* test,
                              const KernelSpec& kernel, const LandmarkStrategy& strategy,
                              int winner_m, double winner_lambda, Metric metric,
                              std::uint64_t base_seed, int trials, int threads) {
  RetrainOutcome out;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed =
        substream_seed(base_seed, kRetrainStream, static_cast<std::uint64_t>(trial));
    const Eigen::Index m = std::min<Eigen::Index>(winner_m, train.size());
    const LandmarkSample lm = draw_landmarks(train.x, kernel, strategy, m, seed, threads);
    NystromModel model = fit_nystrom_batch(train.x, train.y, lm.points, kernel,
                                           winner_lambda, threads);
    if (test != nullptr)
      out.per_trial.push_back(evaluate(model, *test, metric, threads));
    if (trial == 0) out.first_model = std::move(model);
  }
  if (!out.per_trial.empty()) {
    const double n = static_cast<double>(out.per_trial.size());
    out.mean = std::accumulate(out.per_trial.begin(), out.per_trial.end(), 0.0) / n;
    if (out.per_trial.size() > 1) {
      double ss = 0.0;
      for (double v : out.per_trial) ss += (v - out.mean) * (v - out.mean);
      out.stdev = std::sqrt(ss / (n - 1.0));
    }
  }
  return out;
}

// First strict minimum over (m index outer, lambda index inner): ties resolve
// to the smallest m, then the smallest lambda.
void pick_winner(const std::vector<double>& mean_error, std::size_t n_lambda,
                 std::size_t n_m, std::size_t& best_li, std::size_t& best_mi) {
  double best = std::numeric_limits<double>::infinity();
  best_li = 0;
  best_mi = 0;
  for (std::size_t mi = 0; mi < n_m; ++mi)
    for (std::size_t li = 0; li < n_lambda; ++li) {
      const double v = mean_error[li * n_m + mi];
      if (v < best) {
        best = v;
        best_li = li;
        best_mi = mi;
      }
    }
}

}  // namespace

double evaluate_predictions(const Eigen::Ref<const Eigen::VectorXd>& predictions,
                            const Eigen::Ref<const Eigen::VectorXd>& targets,
                            Metric metric) {
  if (predictions.size() != targets.size())
    throw InputError("evaluate: " + std::to_string(predictions.size()) +
                     " predictions vs " + std::to_string(targets.size()) + " targets");
  if (predictions.size() == 0) throw InputError("evaluate: empty evaluation set");
  if (metric == Metric::Rmse)
    return std::sqrt((predictions - targets).squaredNorm() /
                     static_cast<double>(targets.size()));
  check_labels_for_metric(targets, metric);
  Eigen::Index wrong = 0;
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    const double sign = predictions(i) >= 0.0 ? 1.0 : -1.0;
    if (sign != targets(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(targets.size());
}

double evaluate(const NystromModel& model, const Dataset& data, Metric metric,
                int threads) {
  return evaluate_predictions(predict(model, data.x, threads), data.y, metric);
}

GridReport run_grid(const Dataset& train, const Dataset* test, const KernelSpec& kernel,
                    const GridSpec& spec, const LandmarkStrategy& strategy,
                    Metric metric, const GridRunOptions& options) {
  validate(kernel);
  check_strategy(strategy);
  check_common(train.size(), spec.m_grid, spec.holdout_fraction, spec.trials);
  if (spec.lambda_grid.empty()) throw InputError("grid: empty lambda grid");
  double prev_l = 0.0;
  for (double l : spec.lambda_grid) {
    if (!(l > prev_l))
      throw InputError("grid: lambda grid must be strictly ascending and positive");
    prev_l = l;
  }
  check_labels_for_metric(train.y, metric);
  if (test != nullptr) check_labels_for_metric(test->y, metric);

  const std::size_t n_l = spec.lambda_grid.size();
  const std::size_t n_m = spec.m_grid.size();
  const int mmax = spec.m_grid.back();
  const int threads = options.threads;

  GridReport report;
  report.cells.assign(static_cast<std::size_t>(spec.trials) * n_l * n_m, GridCell{});
  std::vector<double> mean_error(n_l * n_m, 0.0);
  std::vector<long long> recovery_slots(static_cast<std::size_t>(spec.trials) * n_l, 0);

  for (int trial = 0; trial < spec.trials; ++trial) {
    const TrialSplit split =
        make_split(train, spec.holdout_fraction, spec.base_seed, trial);
    if (strategy.kind == SamplingStrategy::PlainUniform && mmax > split.xt.rows())
      throw InputError("grid: max(m_grid) = " + std::to_string(mmax) +
                       " exceeds the training split size " +
                       std::to_string(split.xt.rows()));
    const LandmarkSample seq = draw_landmarks(
        split.xt, kernel, strategy, mmax,
        substream_seed(spec.base_seed, kLandmarkStream, static_cast<std::uint64_t>(trial)),
        threads);
    const LandmarkColumns cols =
        build_landmark_columns(split.xt, split.yt, kernel, seq.points, threads);
    const Eigen::MatrixXd kval = gram_block(kernel, split.xv, seq.points, threads);
    const std::vector<Eigen::Index> cell_levels = clamp_levels(spec.m_grid, cols.count());
    std::vector<Eigen::Index> unique_levels = cell_levels;
    unique_levels.erase(std::unique(unique_levels.begin(), unique_levels.end()),
                        unique_levels.end());

    parallel_for(static_cast<std::ptrdiff_t>(n_l), threads, [&](std::ptrdiff_t li) {
      const double lambda = spec.lambda_grid[static_cast<std::size_t>(li)];
      PathEngine engine(cols, lambda);
      std::vector<double> err_at(unique_levels.size(), 0.0);
      std::vector<double> sec_at(unique_levels.size(), 0.0);
      const auto t0 = Clock::now();
      std::size_t ui = 0;
      for (Eigen::Index t = 1; t <= cols.count() && ui < unique_levels.size(); ++t) {
        engine.advance();
        if (unique_levels[ui] != t) continue;
        const Eigen::VectorXd alpha = engine.alpha();
        const Eigen::VectorXd pred = kval.leftCols(t) * alpha;
        err_at[ui] = evaluate_predictions(pred, split.yv, metric);
        sec_at[ui] = seconds_since(t0);
        ++ui;
      }
      recovery_slots[static_cast<std::size_t>(trial) * n_l + static_cast<std::size_t>(li)] =
          engine.recoveries();
      for (std::size_t mi = 0; mi < n_m; ++mi) {
        const auto at = static_cast<std::size_t>(
            std::lower_bound(unique_levels.begin(), unique_levels.end(), cell_levels[mi]) -
            unique_levels.begin());
        GridCell& cell =
            report.cells[(static_cast<std::size_t>(trial) * n_l + static_cast<std::size_t>(li)) *
                             n_m +
                         mi];
        cell.m = spec.m_grid[mi];
        cell.lambda = lambda;
        cell.trial = trial;
        cell.validation_error = err_at[at];
        cell.fit_seconds = sec_at[at];
      }
    });
  }

  for (const GridCell& cell : report.cells) {
    const std::size_t li = static_cast<std::size_t>(
        std::lower_bound(spec.lambda_grid.begin(), spec.lambda_grid.end(), cell.lambda) -
        spec.lambda_grid.begin());
    const std::size_t mi = static_cast<std::size_t>(
        std::lower_bound(spec.m_grid.begin(), spec.m_grid.end(), cell.m) -
        spec.m_grid.begin());
    mean_error[li * n_m + mi] += cell.validation_error / static_cast<double>(spec.trials);
  }
  for (long long r : recovery_slots) report.recoveries += r;

  std::size_t best_li = 0, best_mi = 0;
  pick_winner(mean_error, n_l, n_m, best_li, best_mi);
  report.winner_lambda = spec.lambda_grid[best_li];
  report.winner_m = spec.m_grid[best_mi];
  report.best_mean_error = mean_error[best_li * n_m + best_mi];

  RetrainOutcome retrain =
      retrain_winner(train, test, kernel, strategy, report.winner_m,
                     report.winner_lambda, metric, spec.base_seed, spec.trials, threads);
  report.test_per_trial = std::move(retrain.per_trial);
  report.test_mean = retrain.mean;
  report.test_std = retrain.stdev;
  report.winner_model = std::move(retrain.first_model);

  if (options.effdim_metadata) {
    const TrialSplit split = make_split(train, spec.holdout_fraction, spec.base_seed, 0);
    for (double lambda : spec.lambda_grid)
      report.effdim.push_back(effective_dimension(split.xt, kernel, lambda,
                                                  strategy.dense_cap, threads));
  }
  return report;
}

GridReport run_m_regularized(const Dataset& train, const Dataset* test,
                             const KernelSpec& kernel, const MRegSpec& spec,
                             const Coupling& coupling, const LandmarkStrategy& strategy,
                             Metric metric, const GridRunOptions& options) {
  validate(kernel);
  check_strategy(strategy);
  check_common(train.size(), spec.m_grid, spec.holdout_fraction, spec.trials);
  if (!(spec.lambda_floor > 0.0))
    throw InputError("grid: lambda floor must be positive");
  check_labels_for_metric(train.y, metric);
  if (test != nullptr) check_labels_for_metric(test->y, metric);

  const Coupling couple = coupling
                              ? coupling
                              : Coupling([](int m) {
                                  return std::log(static_cast<double>(m)) /
                                         static_cast<double>(m);
                                });
  const std::size_t n_m = spec.m_grid.size();
  std::vector<double> lambda_of_m(n_m);
  for (std::size_t mi = 0; mi < n_m; ++mi) {
    const double raw = couple(spec.m_grid[mi]);
    if (!std::isfinite(raw))
      throw InputError("grid: coupling produced a non-finite lambda at m = " +
                       std::to_string(spec.m_grid[mi]));
    lambda_of_m[mi] = std::max(raw, spec.lambda_floor);
  }
  const int mmax = spec.m_grid.back();
  const int threads = options.threads;

  GridReport report;
  report.cells.assign(static_cast<std::size_t>(spec.trials) * n_m, GridCell{});
  std::vector<double> mean_error(n_m, 0.0);

  for (int trial = 0; trial < spec.trials; ++trial) {
    const TrialSplit split =
        make_split(train, spec.holdout_fraction, spec.base_seed, trial);
    if (strategy.kind == SamplingStrategy::PlainUniform && mmax > split.xt.rows())
      throw InputError("grid: max(m_grid) = " + std::to_string(mmax) +
                       " exceeds the training split size " +
                       std::to_string(split.xt.rows()));
    const LandmarkSample seq = draw_landmarks(
        split.xt, kernel, strategy, mmax,
        substream_seed(spec.base_seed, kLandmarkStream, static_cast<std::uint64_t>(trial)),
        threads);
    const LandmarkColumns cols =
        build_landmark_columns(split.xt, split.yt, kernel, seq.points, threads);
    const Eigen::MatrixXd kval = gram_block(kernel, split.xv, seq.points, threads);
    const std::vector<Eigen::Index> cell_levels = clamp_levels(spec.m_grid, cols.count());
    const double nt = static_cast<double>(split.xt.rows());

    parallel_for(static_cast<std::ptrdiff_t>(n_m), threads, [&](std::ptrdiff_t mi) {
      const auto t0 = Clock::now();
      const Eigen::Index t = cell_levels[static_cast<std::size_t>(mi)];
      const double lambda = lambda_of_m[static_cast<std::size_t>(mi)];
      // Batch fit straight from the cache prefix; same normal equations as
      // fit_nystrom_batch on the first t landmarks.
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(t, t);
      g.selfadjointView<Eigen::Lower>().rankUpdate(cols.a_cols.leftCols(t).transpose());
      for (Eigen::Index i = 0; i < t; ++i)
        for (Eigen::Index j = i + 1; j < t; ++j) g(i, j) = g(j, i);
      g += lambda * nt * cols.kmm.topLeftCorner(t, t);
      UpperMat r;
      jittered_cholesky(g, r);
      Eigen::VectorXd alpha =
          tri_solve(r, cols.aty.head(t), SolveMode::TransposedFirst);
      alpha = tri_solve(r, alpha, SolveMode::Direct);
      const Eigen::VectorXd pred = kval.leftCols(t) * alpha;
      GridCell& cell = report.cells[static_cast<std::size_t>(trial) * n_m +
                                    static_cast<std::size_t>(mi)];
      cell.m = spec.m_grid[static_cast<std::size_t>(mi)];
      cell.lambda = lambda;
      cell.trial = trial;
      cell.validation_error = evaluate_predictions(pred, split.yv, metric);
      cell.fit_seconds = seconds_since(t0);
    });
  }

  for (const GridCell& cell : report.cells) {
    const std::size_t mi = static_cast<std::size_t>(
        std::lower_bound(spec.m_grid.begin(), spec.m_grid.end(), cell.m) -
        spec.m_grid.begin());
    mean_error[mi] += cell.validation_error / static_cast<double>(spec.trials);
  }

  std::size_t best_li = 0, best_mi = 0;
  pick_winner(mean_error, 1, n_m, best_li, best_mi);
  report.winner_m = spec.m_grid[best_mi];
  report.winner_lambda = lambda_of_m[best_mi];
  report.best_mean_error = mean_error[best_mi];

  RetrainOutcome retrain =
      retrain_winner(train, test, kernel, strategy, report.winner_m,
                     report.winner_lambda, metric, spec.base_seed, spec.trials, threads);
  report.test_per_trial = std::move(retrain.per_trial);
  report.test_mean = retrain.mean;
  report.test_std = retrain.stdev;
  report.winner_model = std::move(retrain.first_model);

  if (options.effdim_metadata) {
    const TrialSplit split = make_split(train, spec.holdout_fraction, spec.base_seed, 0);
    for (std::size_t mi = 0; mi < n_m; ++mi)
      report.effdim.push_back(effective_dimension(split.xt, kernel, lambda_of_m[mi],
                                                  strategy.dense_cap, threads));
  }
  return report;
}

}  // namespace nykrls
