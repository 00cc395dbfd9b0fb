#include "nykrls/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "nykrls/dataset.hpp"
#include "nykrls/model_io.hpp"
#include "nykrls/rng.hpp"

namespace nykrls {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LoadedData {
  Dataset train;
  std::optional<Dataset> test;
};

LoadedData load_data(const DatasetConfig& dc) {
  const CsvSchema schema{dc.target_column, dc.delimiter, dc.header};
  LoadedData data;
  data.train = ingest_csv(dc.train_csv, schema);
  if (dc.test_csv) {
    data.test = ingest_csv(*dc.test_csv, schema);
    if (data.test->dim() != data.train.dim())
      throw DataError("test file has " + std::to_string(data.test->dim()) +
                      " feature columns, train file has " +
                      std::to_string(data.train.dim()));
  }
  if (dc.standardize) {
    // Statistics come from the training part only; the test part is mapped
    // through the same transform.
    const Standardizer standardizer = Standardizer::fit(data.train.x);
    data.train.x = standardizer.apply(data.train.x);
    if (data.test) data.test->x = standardizer.apply(data.test->x);
  }
  return data;
}

LandmarkStrategy to_strategy(const ExperimentConfig& c) {
  LandmarkStrategy s;
  s.kind = c.strategy.kind;
  s.score_t = c.strategy.score_t;
  s.approximate_scores = c.strategy.approximate_scores;
  s.sketch_size = c.strategy.sketch_size;
  s.dense_cap = c.dense_cap;
  return s;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw DataError("cannot write '" + (dir / name).string() + "'");
  return out;
}

std::string provenance(const char* command, const ExperimentConfig& config) {
  json j;
  j["command"] = command;
  j["config"] = config_to_json(config);
  return j.dump();
}

}  // namespace

void cmd_grid(const ExperimentConfig& config, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const LoadedData data = load_data(config.dataset);
  const Dataset* test = data.test ? &*data.test : nullptr;
  const LandmarkStrategy strategy = to_strategy(config);
  GridRunOptions options;
  options.threads = config.threads;
  options.effdim_metadata = config.grid.effdim_metadata;

  GridReport report;
  if (config.grid.coupled) {
    MRegSpec spec;
    spec.m_grid = config.grid.ms;
    spec.holdout_fraction = config.grid.holdout_fraction;
    spec.trials = config.grid.trials;
    spec.base_seed = config.seed;
    spec.lambda_floor = config.grid.lambda_floor;
    report = run_m_regularized(data.train, test, config.kernel, spec, nullptr,
                               strategy, config.metric, options);
  } else {
    GridSpec spec;
    spec.lambda_grid = config.grid.lambdas;
    spec.m_grid = config.grid.ms;
    spec.holdout_fraction = config.grid.holdout_fraction;
    spec.trials = config.grid.trials;
    spec.base_seed = config.seed;
    report = run_grid(data.train, test, config.kernel, spec, strategy, config.metric,
                      options);
  }

  {
    std::ofstream out = open_out(out_dir, "surface.csv");
    out << "# " << provenance("grid", config) << '\n';
    out << "m,lambda,trial,validation_error,fit_seconds\n";
    for (const GridCell& cell : report.cells)
      out << cell.m << ',' << fmt17(cell.lambda) << ',' << cell.trial << ','
          << fmt17(cell.validation_error) << ',' << fmt17(cell.fit_seconds) << '\n';
    if (!out) throw DataError("write failed for surface.csv");
  }
  {
    json summary;
    summary["command"] = "grid";
    summary["config"] = config_to_json(config);
    summary["winner"] = {{"m", report.winner_m}, {"lambda", report.winner_lambda}};
    summary["validation"] = {{"best_mean_error", report.best_mean_error}};
    if (!report.test_per_trial.empty()) {
      summary["test"] = {{"metric", config.metric == Metric::Rmse ? "rmse" : "zero_one"},
                         {"mean", report.test_mean},
                         {"std", report.test_std},
                         {"per_trial", report.test_per_trial}};
    } else {
      summary["test"] = nullptr;
    }
    summary["recoveries"] = report.recoveries;
    if (!report.effdim.empty()) {
      json effdim = json::array();
      for (const EffectiveDimension& e : report.effdim)
        effdim.push_back({{"lambda", e.lambda}, {"value", e.value}});
      summary["effective_dimension"] = std::move(effdim);
    }
    summary["timing"] = {
        {"total_seconds",
         std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    std::ofstream out = open_out(out_dir, "summary.json");
    out << summary.dump(2) << '\n';
    if (!out) throw DataError("write failed for summary.json");
  }
  if (report.winner_model)
    save_model(*report.winner_model, (fs::path(out_dir) / "model.json").string());
}

void cmd_path(const ExperimentConfig& config, const std::string& out_dir) {
  const LoadedData data = load_data(config.dataset);
  Eigen::MatrixXd x = data.train.x;
  Eigen::VectorXd y = data.train.y;
  Eigen::MatrixXd xv;
  Eigen::VectorXd yv;
  const bool validate_levels = config.path.holdout_fraction > 0.0;
  if (validate_levels) {
    // Same hold-out construction as the grid driver, trial 0.
    Dataset holdout_train;
    const Eigen::Index n = data.train.size();
    Eigen::Index nv = static_cast<Eigen::Index>(
        std::llround(config.path.holdout_fraction * static_cast<double>(n)));
    nv = std::max<Eigen::Index>(1, std::min(nv, n - 1));
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng rng(substream_seed(config.seed, kSplitStream, 0));
    shuffle(perm, rng);
    const Eigen::Index nt = n - nv;
    Eigen::MatrixXd xt(nt, data.train.dim());
    Eigen::VectorXd yt(nt);
    xv.resize(nv, data.train.dim());
    yv.resize(nv);
    for (Eigen::Index i = 0; i < nt; ++i) {
      xt.row(i) = data.train.x.row(perm[static_cast<std::size_t>(i)]);
      yt(i) = data.train.y(perm[static_cast<std::size_t>(i)]);
    }
    for (Eigen::Index i = 0; i < nv; ++i) {
      xv.row(i) = data.train.x.row(perm[static_cast<std::size_t>(nt + i)]);
      yv(i) = data.train.y(perm[static_cast<std::size_t>(nt + i)]);
    }
    x = std::move(xt);
    y = std::move(yt);
  }

  const LandmarkStrategy strategy = to_strategy(config);
  const LandmarkSample seq =
      [&] {
        if (strategy.kind == SamplingStrategy::PlainUniform)
          return sample_landmarks(
              plain_uniform_plan(config.path.m,
                                 substream_seed(config.seed, kLandmarkStream, 0)),
              x);
        LeverageScores scores;
        if (strategy.approximate_scores) {
          const Eigen::Index sketch =
              std::min<Eigen::Index>(strategy.sketch_size, x.rows());
          scores = leverage_scores_approx(
              x, config.kernel, strategy.score_t, sketch,
              substream_seed(substream_seed(config.seed, kLandmarkStream, 0),
                             kScoreStream),
              {}, config.threads);
        } else {
          scores = leverage_scores_exact(x, config.kernel, strategy.score_t,
                                         config.dense_cap, config.threads);
        }
        return sample_landmarks(
            leverage_weighted_plan(scores, config.path.m,
                                   substream_seed(config.seed, kLandmarkStream, 0)),
            x);
      }();

  const Eigen::Index len = static_cast<Eigen::Index>(seq.indices.size());
  PathOptions options;
  options.threads = config.threads;
  options.collect_models = false;
  for (Eigen::Index t = config.path.level_stride; t <= len;
       t += config.path.level_stride)
    options.levels.push_back(static_cast<int>(t));
  if (options.levels.empty() || options.levels.back() != len)
    options.levels.push_back(static_cast<int>(len));

  Eigen::MatrixXd kval;
  if (validate_levels)
    kval = gram_block(config.kernel, xv, seq.points, config.threads);

  std::ofstream out = open_out(out_dir, "path.ndjson");
  out << provenance("path", config) << '\n';
  PathStats stats;
  run_path(x, y, config.kernel, config.path.lambda, seq.points, options,
           [&](const PathLevelRecord& rec, const Eigen::VectorXd& alpha) {
             json line;
             line["t"] = rec.t;
             line["lambda"] = rec.lambda;
             line["seconds"] = rec.seconds;
             if (validate_levels) {
               const Eigen::VectorXd pred = kval.leftCols(rec.t) * alpha;
               line["val_error"] = evaluate_predictions(pred, yv, config.metric);
             }
             out << line.dump() << '\n';
           },
           &stats);
  json tail;
  tail["recoveries"] = stats.recoveries;
  tail["landmarks"] = len;
  out << tail.dump() << '\n';
  if (!out) throw DataError("write failed for path.ndjson");
}

void cmd_scores(const ExperimentConfig& config, const std::string& out_dir) {
  const LoadedData data = load_data(config.dataset);
  LeverageScores scores;
  if (config.scores.approximate) {
    ApproxScoreOptions opts;
    opts.measure_factor = config.scores.measure_factor;
    opts.dense_cap = config.dense_cap;
    const Eigen::Index sketch =
        std::min<Eigen::Index>(config.scores.sketch_size, data.train.size());
    scores = leverage_scores_approx(data.train.x, config.kernel, config.scores.t,
                                    sketch, substream_seed(config.seed, kScoreStream, 0),
                                    opts, config.threads);
  } else {
    scores = leverage_scores_exact(data.train.x, config.kernel, config.scores.t,
                                   config.dense_cap, config.threads);
  }
  std::ofstream out = open_out(out_dir, "scores.csv");
  json head;
  head["command"] = "scores";
  head["config"] = config_to_json(config);
  head["exactness"] =
      scores.exactness == ScoreExactness::Exact ? "exact" : "approximate";
  if (scores.measured_factor) head["measured_factor"] = *scores.measured_factor;
  out << "# " << head.dump() << '\n';
  out << "index,score\n";
  for (Eigen::Index i = 0; i < scores.scores.size(); ++i)
    out << i << ',' << fmt17(scores.scores(i)) << '\n';
  if (!out) throw DataError("write failed for scores.csv");
}

void cmd_effdim(const ExperimentConfig& config, const std::string& out_dir) {
  if (config.effdim.lambdas.empty())
    throw ConfigError("config: effdim.lambda axis is required for the effdim command");
  const LoadedData data = load_data(config.dataset);
  std::ofstream out = open_out(out_dir, "effdim.csv");
  out << "# " << provenance("effdim", config) << '\n';
  out << "lambda,value\n";
  for (double lambda : config.effdim.lambdas) {
    const EffectiveDimension e = effective_dimension(
        data.train.x, config.kernel, lambda, config.dense_cap, config.threads);
    out << fmt17(e.lambda) << ',' << fmt17(e.value) << '\n';
  }
  if (!out) throw DataError("write failed for effdim.csv");
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Nystrom kernel regularized least squares experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = "out";
  int threads_override = 0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--threads", threads_override, "Worker thread override");
    sub->add_option("--out", out_dir, "Output directory");
  };
  CLI::App* grid = app.add_subcommand("grid", "Hold-out grid search over (lambda, m)");
  CLI::App* path = app.add_subcommand("path", "Incremental path at fixed lambda");
  CLI::App* scores = app.add_subcommand("scores", "Leverage scores of the training set");
  CLI::App* effdim = app.add_subcommand("effdim", "Effective dimension per lambda");
  for (CLI::App* sub : {grid, path, scores, effdim}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    ExperimentConfig config = load_config(config_path);
    if (threads_override > 0) config.threads = threads_override;
    if (grid->parsed())
      cmd_grid(config, out_dir);
    else if (path->parsed())
      cmd_path(config, out_dir);
    else if (scores->parsed())
      cmd_scores(config, out_dir);
    else
      cmd_effdim(config, out_dir);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace nykrls
