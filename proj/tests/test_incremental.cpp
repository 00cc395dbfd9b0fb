#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "nykrls/incremental.hpp"
#include "test_support.hpp"

using nykrls::CholeskyPathState;
using nykrls::KernelSpec;
using nykrls::LandmarkColumns;
using nykrls::NystromModel;
using nykrls::PathEngine;
using test_support::random_matrix;
using test_support::random_vector;

namespace {

double pred_rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / (1e-12 + want.norm());
}

}  // namespace

TEST_CASE("landmark column cache matches direct kernel evaluation") {
  KernelSpec k;
  k.sigma = 1.1;
  nykrls::Rng rng(151);
  const Eigen::MatrixXd x = random_matrix(rng, 20, 3);
  const Eigen::VectorXd y = random_vector(rng, 20);
  const Eigen::MatrixXd lms = x.topRows(6);
  const LandmarkColumns cols = nykrls::build_landmark_columns(x, y, k, lms);

  CHECK(cols.n() == 20);
  CHECK(cols.count() == 6);
  CHECK(cols.a_cols == nykrls::gram_block(k, x, lms));
  CHECK(cols.kmm == nykrls::gram_block(k, lms, lms));
  CHECK(cols.landmarks == lms);
  CHECK((cols.aty - cols.a_cols.transpose() * y).norm() < 1e-12);
}

TEST_CASE("first level factor is the square root of its scalar system") {
  KernelSpec k;
  nykrls::Rng rng(157);
  const Eigen::MatrixXd x = random_matrix(rng, 15, 2);
  const Eigen::VectorXd y = random_vector(rng, 15);
  const double lambda = 1e-2;
  const CholeskyPathState state = nykrls::path_init(x, y, k, lambda, x.row(0));

  const Eigen::VectorXd a1 = nykrls::gram_block(k, x, x.topRows(1)).col(0);
  const double gamma1 = a1.squaredNorm() + lambda * 15.0 * 1.0;
  CHECK(state.level() == 1);
  CHECK(state.factor().matrix()(0, 0) ==
        doctest::Approx(std::sqrt(gamma1)).epsilon(1e-14));
  CHECK(state.alpha()(0) ==
        doctest::Approx(a1.dot(y) / gamma1).epsilon(1e-12));
}

TEST_CASE("border vectors reproduce the bordered block") {
  nykrls::Rng rng(163);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index t = 1 + static_cast<Eigen::Index>(rng.below(9));
    const Eigen::VectorXd c = random_vector(rng, t, 2.0);
    const double gamma = 0.1 + 5.0 * rng.uniform();
    Eigen::VectorXd u, v;
    nykrls::detail::make_border_vectors(c, gamma, u, v);
    REQUIRE(u.size() == t + 1);
    REQUIRE(v.size() == t + 1);

    const Eigen::MatrixXd diff = u * u.transpose() - v * v.transpose();
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(t + 1, t + 1);
    expected.topRightCorner(t, 1) = c;
    expected.bottomLeftCorner(1, t) = c.transpose();
    expected(t, t) = gamma;
    CHECK((diff - expected).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + gamma));
  }
}

TEST_CASE("engine factor reconstructs the level system at every level") {
  KernelSpec k;
  k.sigma = 1.3;
  nykrls::Rng rng(167);
  const Eigen::MatrixXd x = random_matrix(rng, 40, 3);
  const Eigen::VectorXd y = random_vector(rng, 40);
  const double lambda = 1e-3;
  const Eigen::MatrixXd lms = x.topRows(12);
  const LandmarkColumns cols = nykrls::build_landmark_columns(x, y, k, lms);

  PathEngine engine(cols, lambda);
  for (int t = 1; t <= 12; ++t) {
    engine.advance();
    REQUIRE(engine.level() == t);
    const auto a_t = cols.a_cols.leftCols(t);
    Eigen::MatrixXd g = a_t.transpose() * a_t +
                        lambda * 40.0 * cols.kmm.topLeftCorner(t, t);
    const auto r = engine.factor_buffer().topLeftCorner(t, t);
    const Eigen::MatrixXd recon = r.transpose() * r;
    CHECK((recon - g).norm() < 1e-8 * (1.0 + g.norm()));
  }
  CHECK(engine.recoveries() == 0);
}

TEST_CASE("incremental coefficients match batch fits at every level") {
  KernelSpec k;
  k.sigma = std::sqrt(3.0);
  nykrls::Rng rng(173);
  const Eigen::MatrixXd x = random_matrix(rng, 50, 3);
  const Eigen::VectorXd y = random_vector(rng, 50);
  const double lambda = 1e-3;

  CholeskyPathState state = nykrls::path_init(x, y, k, lambda, x.row(0));
  for (int t = 1; t <= 10; ++t) {
    if (t > 1) nykrls::path_step(state, x.row(t - 1));
    const NystromModel batch =
        nykrls::fit_nystrom_batch(x, y, x.topRows(t), k, lambda);
    NystromModel inc;
    inc.kernel = k;
    inc.lambda = lambda;
    inc.landmarks = state.landmarks();
    inc.alpha = state.alpha();
    CHECK(pred_rel_err(nykrls::predict(inc, x), nykrls::predict(batch, x)) <
          1e-6);
  }
}

TEST_CASE("engine and online state walk to the same coefficients") {
  KernelSpec k;
  k.sigma = 0.9;
  nykrls::Rng rng(179);
  const Eigen::MatrixXd x = random_matrix(rng, 30, 2);
  const Eigen::VectorXd y = random_vector(rng, 30);
  const double lambda = 5e-3;
  const Eigen::MatrixXd lms = x.middleRows(3, 8);

  const LandmarkColumns cols = nykrls::build_landmark_columns(x, y, k, lms);
  PathEngine engine(cols, lambda);
  CholeskyPathState state = nykrls::path_init(x, y, k, lambda, lms.row(0));
  for (int t = 1; t <= 8; ++t) {
    engine.advance();
    if (t > 1) nykrls::path_step(state, lms.row(t - 1));
    const Eigen::VectorXd ae = engine.alpha();
    const Eigen::VectorXd as = state.alpha();
    REQUIRE(ae.size() == as.size());
    CHECK((ae - as).norm() < 1e-10 * (1.0 + as.norm()));
  }
}

TEST_CASE("repeating a landmark leaves predictions at the one landmark fit") {
  KernelSpec k;
  nykrls::Rng rng(181);
  const Eigen::MatrixXd x = random_matrix(rng, 20, 2);
  const Eigen::VectorXd y = random_vector(rng, 20);
  const double lambda = 1e-2;

  // The duplicated column makes the level-two system exactly singular; the
  // walker must survive through downdate recovery and still predict like the
  // well posed one landmark problem.
  CholeskyPathState state = nykrls::path_init(x, y, k, lambda, x.row(4));
  nykrls::path_step(state, x.row(4));
  CHECK(state.level() == 2);
  CHECK(state.alpha().allFinite());

  NystromModel inc;
  inc.kernel = k;
  inc.lambda = lambda;
  inc.landmarks = state.landmarks();
  inc.alpha = state.alpha();
  const NystromModel one =
      nykrls::fit_nystrom_batch(x, y, x.middleRows(4, 1), k, lambda);
  CHECK(pred_rel_err(nykrls::predict(inc, x), nykrls::predict(one, x)) < 1e-6);
}

TEST_CASE("full path run emits requested levels in order") {
  KernelSpec k;
  k.sigma = 1.0;
  nykrls::Rng rng(191);
  const Eigen::MatrixXd x = random_matrix(rng, 25, 2);
  const Eigen::VectorXd y = random_vector(rng, 25);
  const Eigen::MatrixXd lms = x.topRows(8);

  nykrls::PathOptions opt;
  opt.levels = {2, 5, 7};
  std::vector<int> seen;
  std::vector<Eigen::Index> alpha_sizes;
  nykrls::PathStats stats;
  const std::vector<NystromModel> models = nykrls::run_path(
      x, y, k, 1e-3, lms, opt,
      [&](const nykrls::PathLevelRecord& rec, const Eigen::VectorXd& alpha) {
        seen.push_back(rec.t);
        alpha_sizes.push_back(alpha.size());
        CHECK(rec.lambda == 1e-3);
        CHECK(rec.seconds >= 0.0);
      },
      &stats);

  CHECK(seen == std::vector<int>{2, 5, 7});
  CHECK(alpha_sizes == std::vector<Eigen::Index>{2, 5, 7});
  REQUIRE(models.size() == 3);
  for (std::size_t i = 0; i < models.size(); ++i) {
    CHECK(models[i].count() == seen[i]);
    CHECK(models[i].landmarks == lms.topRows(seen[i]));
  }
  CHECK(stats.recoveries == 0);
}

TEST_CASE("diagnostics mode certifies the factors along a benign path") {
  KernelSpec k;
  k.sigma = 1.4;
  nykrls::Rng rng(193);
  const Eigen::MatrixXd x = random_matrix(rng, 60, 4);
  const Eigen::VectorXd y = random_vector(rng, 60);
  const Eigen::MatrixXd lms = x.topRows(15);

  nykrls::PathOptions opt;
  opt.diagnostics = true;
  opt.collect_models = false;
  nykrls::PathStats stats;
  const auto models = nykrls::run_path(x, y, k, 1e-2, lms, opt, nullptr, &stats);
  CHECK(models.empty());
  CHECK(stats.recoveries == 0);
  CHECK(stats.max_factor_rel_err < 1e-7);
}

TEST_CASE("path run validates its inputs") {
  KernelSpec k;
  nykrls::Rng rng(197);
  const Eigen::MatrixXd x = random_matrix(rng, 10, 2);
  const Eigen::VectorXd y = random_vector(rng, 10);
  const Eigen::MatrixXd lms = x.topRows(4);

  CHECK_THROWS_AS(nykrls::run_path(x, y, k, 0.0, lms), nykrls::InputError);

  nykrls::PathOptions bad;
  bad.levels = {3, 2};
  CHECK_THROWS_AS(nykrls::run_path(x, y, k, 1e-3, lms, bad),
                  nykrls::InputError);
  bad.levels = {0, 2};
  CHECK_THROWS_AS(nykrls::run_path(x, y, k, 1e-3, lms, bad),
                  nykrls::InputError);
  bad.levels = {2, 5};  // beyond the landmark count
  CHECK_THROWS_AS(nykrls::run_path(x, y, k, 1e-3, lms, bad),
                  nykrls::InputError);

  CHECK_THROWS_AS(
      nykrls::path_init(x, Eigen::VectorXd::Zero(9), k, 1e-3, x.row(0)),
      nykrls::InputError);
  CHECK_THROWS_AS(nykrls::path_init(x, y, k, -1.0, x.row(0)),
                  nykrls::InputError);
}

TEST_CASE("many landmark online path stays consistent with batch refits") {
  KernelSpec k;
  k.sigma = std::sqrt(2.0);
  nykrls::Rng rng(199);
  const Eigen::MatrixXd x = random_matrix(rng, 80, 2);
  const Eigen::VectorXd y = random_vector(rng, 80);
  const double lambda = 1e-4;
  const int m = 30;

  CholeskyPathState state = nykrls::path_init(x, y, k, lambda, x.row(0));
  for (int t = 2; t <= m; ++t) nykrls::path_step(state, x.row(t - 1));

  NystromModel inc;
  inc.kernel = k;
  inc.lambda = lambda;
  inc.landmarks = state.landmarks();
  inc.alpha = state.alpha();
  const NystromModel batch =
      nykrls::fit_nystrom_batch(x, y, x.topRows(m), k, lambda);
  CHECK(pred_rel_err(nykrls::predict(inc, x), nykrls::predict(batch, x)) <
        1e-6);
  CHECK(state.recoveries() == 0);
}
