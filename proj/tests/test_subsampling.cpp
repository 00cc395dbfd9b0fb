#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "nykrls/diagnostics.hpp"
#include "nykrls/subsampling.hpp"
#include "test_support.hpp"

using nykrls::KernelSpec;
using nykrls::LandmarkSample;
using nykrls::LeverageScores;
using nykrls::SamplingPlan;
using nykrls::SamplingStrategy;
using test_support::random_matrix;

TEST_CASE("single point score has a closed form") {
  KernelSpec k;
  Eigen::MatrixXd x(1, 1);
  x << 0.5;
  // With one point, K = [1] and n = 1: score = 1 / (1 + t).
  for (double t : {1e-3, 1e-1, 1.0, 10.0}) {
    const LeverageScores s = nykrls::leverage_scores_exact(x, k, t);
    CHECK(s.scores(0) == doctest::Approx(1.0 / (1.0 + t)).epsilon(1e-12));
  }
}

TEST_CASE("scores match the eigendecomposition formula") {
  KernelSpec k;
  k.sigma = 0.8;
  nykrls::Rng rng(61);
  const Eigen::MatrixXd x = random_matrix(rng, 25, 3);
  const double t = 1e-2;
  const double n = 25.0;
  const LeverageScores s = nykrls::leverage_scores_exact(x, k, t);

  const Eigen::MatrixXd gram = nykrls::gram_block(k, x, x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  // score_i = sum_j (sigma_j / (sigma_j + t n)) u_ji^2
  for (Eigen::Index i = 0; i < 25; ++i) {
    double expected = 0.0;
    for (Eigen::Index j = 0; j < 25; ++j) {
      const double v = std::max(eig.eigenvalues()(j), 0.0);
      expected += v / (v + t * n) * eig.eigenvectors()(i, j) *
                  eig.eigenvectors()(i, j);
    }
    CHECK(s.scores(i) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("scores sum to the effective dimension") {
  KernelSpec k;
  k.sigma = 1.1;
  nykrls::Rng rng(67);
  const Eigen::MatrixXd x = random_matrix(rng, 40, 2);
  for (double t : {1e-4, 1e-2, 1.0}) {
    const LeverageScores s = nykrls::leverage_scores_exact(x, k, t);
    const double effdim = nykrls::effective_dimension(x, k, t).value;
    CHECK(s.scores.sum() == doctest::Approx(effdim).epsilon(1e-8));
  }
}

TEST_CASE("scores lie in the unit interval and shrink as t grows") {
  KernelSpec k;
  nykrls::Rng rng(71);
  const Eigen::MatrixXd x = random_matrix(rng, 30, 4);
  Eigen::VectorXd previous;
  for (double t : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    const LeverageScores s = nykrls::leverage_scores_exact(x, k, t);
    CHECK(s.scores.minCoeff() >= 0.0);
    CHECK(s.scores.maxCoeff() <= 1.0);
    if (previous.size() != 0)
      for (Eigen::Index i = 0; i < s.scores.size(); ++i)
        CHECK(s.scores(i) <= previous(i) + 1e-12);
    previous = s.scores;
  }
  // At heavy regularization every score is at most 1 / (t n) roughly; use
  // the crude bound score <= 1 / t valid once t n >= 1.
  const LeverageScores heavy = nykrls::leverage_scores_exact(x, k, 50.0);
  CHECK(heavy.scores.maxCoeff() <= 1.0 / 50.0);
}

TEST_CASE("invalid regularization level is rejected") {
  KernelSpec k;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
  CHECK_THROWS_AS(nykrls::leverage_scores_exact(x, k, 0.0), nykrls::InputError);
  CHECK_THROWS_AS(nykrls::leverage_scores_exact(x, k, -1.0), nykrls::InputError);
}

TEST_CASE("dense cap refuses oversized problems") {
  KernelSpec k;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(11, 1);
  CHECK_THROWS_AS(nykrls::leverage_scores_exact(x, k, 1.0, 10),
                  nykrls::ResourceError);
}

TEST_CASE("full sketch reproduces exact scores") {
  KernelSpec k;
  k.sigma = 0.9;
  nykrls::Rng rng(73);
  const Eigen::MatrixXd x = random_matrix(rng, 35, 3);
  const double t = 1e-2;
  const LeverageScores exact = nykrls::leverage_scores_exact(x, k, t);
  const LeverageScores approx =
      nykrls::leverage_scores_approx(x, k, t, 35, 99);
  CHECK(approx.exactness == nykrls::ScoreExactness::Approximate);
  CHECK((approx.scores - exact.scores).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("measured approximation factor bounds the scores both ways") {
  KernelSpec k;
  k.sigma = 1.0;
  nykrls::Rng rng(79);
  const Eigen::MatrixXd x = random_matrix(rng, 60, 2);
  const double t = 1e-2;
  nykrls::ApproxScoreOptions opt;
  opt.measure_factor = true;
  const LeverageScores approx =
      nykrls::leverage_scores_approx(x, k, t, 20, 5, opt);
  REQUIRE(approx.measured_factor.has_value());
  const double factor = *approx.measured_factor;
  CHECK(factor >= 1.0);
  const LeverageScores exact = nykrls::leverage_scores_exact(x, k, t);
  for (Eigen::Index i = 0; i < 60; ++i) {
    CHECK(approx.scores(i) <= factor * exact.scores(i) * (1.0 + 1e-12));
    CHECK(exact.scores(i) <= factor * approx.scores(i) * (1.0 + 1e-12));
  }
}

TEST_CASE("approximate scores are deterministic in the seed") {
  KernelSpec k;
  nykrls::Rng rng(83);
  const Eigen::MatrixXd x = random_matrix(rng, 50, 2);
  const LeverageScores a = nykrls::leverage_scores_approx(x, k, 1e-2, 15, 42);
  const LeverageScores b =
      nykrls::leverage_scores_approx(x, k, 1e-2, 15, 42, {}, 4);
  CHECK(a.scores == b.scores);
  const LeverageScores c = nykrls::leverage_scores_approx(x, k, 1e-2, 15, 43);
  CHECK(a.scores != c.scores);
}

TEST_CASE("uniform sampling without replacement covers the full set") {
  nykrls::Rng rng(89);
  const Eigen::MatrixXd x = random_matrix(rng, 12, 2);
  const LandmarkSample s =
      nykrls::sample_landmarks(nykrls::plain_uniform_plan(12, 3), x);
  REQUIRE(s.indices.size() == 12);
  std::set<Eigen::Index> seen(s.indices.begin(), s.indices.end());
  CHECK(seen.size() == 12);  // a permutation: every row exactly once
  for (std::size_t i = 0; i < s.indices.size(); ++i)
    CHECK(s.points.row(static_cast<Eigen::Index>(i)) == x.row(s.indices[i]));
}

TEST_CASE("uniform sampling rejects oversized requests") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(5, 1);
  CHECK_THROWS_AS(nykrls::sample_landmarks(nykrls::plain_uniform_plan(6, 0), x),
                  nykrls::InputError);
  CHECK_THROWS_AS(nykrls::sample_landmarks(nykrls::plain_uniform_plan(0, 0), x),
                  nykrls::InputError);
}

TEST_CASE("sampling is deterministic in the plan") {
  nykrls::Rng rng(97);
  const Eigen::MatrixXd x = random_matrix(rng, 100, 2);
  const LandmarkSample a =
      nykrls::sample_landmarks(nykrls::plain_uniform_plan(10, 7), x);
  const LandmarkSample b =
      nykrls::sample_landmarks(nykrls::plain_uniform_plan(10, 7), x);
  CHECK(a.indices == b.indices);
  const LandmarkSample c =
      nykrls::sample_landmarks(nykrls::plain_uniform_plan(10, 8), x);
  CHECK(a.indices != c.indices);
}

TEST_CASE("weighted sampling follows the probabilities") {
  // Mass concentrated on one row selects only that row.
  LeverageScores scores;
  scores.t = 1e-2;
  scores.scores = Eigen::VectorXd::Zero(6);
  scores.scores(4) = 0.7;
  nykrls::Rng rng(101);
  const Eigen::MatrixXd x = random_matrix(rng, 6, 2);
  const SamplingPlan plan = nykrls::leverage_weighted_plan(scores, 5, 11);
  CHECK(plan.strategy == SamplingStrategy::LeverageWeighted);
  const LandmarkSample s = nykrls::sample_landmarks(plan, x);
  REQUIRE(s.draws.size() == 5);   // i.i.d. draws with replacement
  REQUIRE(s.indices.size() == 1); // duplicates collapse
  CHECK(s.indices[0] == 4);
  CHECK(s.points.row(0) == x.row(4));
}

TEST_CASE("weighted draw frequencies match the distribution") {
  LeverageScores scores;
  scores.t = 1e-2;
  scores.scores = Eigen::VectorXd(4);
  scores.scores << 0.1, 0.2, 0.3, 0.4;
  nykrls::Rng rng(103);
  const Eigen::MatrixXd x = random_matrix(rng, 4, 1);
  const SamplingPlan plan = nykrls::leverage_weighted_plan(scores, 1000, 7);
  const LandmarkSample s = nykrls::sample_landmarks(plan, x);
  REQUIRE(s.draws.size() == 1000);
  Eigen::Vector4d counts = Eigen::Vector4d::Zero();
  for (Eigen::Index idx : s.draws) counts(idx) += 1.0;
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double p = scores.scores(i);  // already sums to one
    const double sd = std::sqrt(1000.0 * p * (1.0 - p));
    CHECK(std::abs(counts(i) - 1000.0 * p) <= 3.0 * sd);
  }
}

TEST_CASE("duplicate removal keeps first occurrences in draw order") {
  LeverageScores scores;
  scores.t = 1.0;
  scores.scores = Eigen::VectorXd::Constant(3, 1.0);
  nykrls::Rng rng(107);
  const Eigen::MatrixXd x = random_matrix(rng, 3, 1);
  const SamplingPlan plan = nykrls::leverage_weighted_plan(scores, 50, 13);
  const LandmarkSample s = nykrls::sample_landmarks(plan, x);
  // With 50 draws over 3 rows every row appears; indices must list each row
  // once, ordered by its first appearance among the raw draws.
  REQUIRE(s.indices.size() == 3);
  std::vector<Eigen::Index> expected;
  for (Eigen::Index d : s.draws)
    if (std::find(expected.begin(), expected.end(), d) == expected.end())
      expected.push_back(d);
  CHECK(s.indices == expected);
}

TEST_CASE("invalid weighted plans are rejected") {
  nykrls::Rng rng(109);
  const Eigen::MatrixXd x = random_matrix(rng, 4, 1);

  LeverageScores negative;
  negative.t = 1.0;
  negative.scores = Eigen::VectorXd(2);
  negative.scores << 0.5, -0.1;
  CHECK_THROWS_AS(nykrls::leverage_weighted_plan(negative, 2, 0),
                  nykrls::InputError);

  LeverageScores zero;
  zero.t = 1.0;
  zero.scores = Eigen::VectorXd::Zero(4);
  CHECK_THROWS_AS(nykrls::leverage_weighted_plan(zero, 2, 0),
                  nykrls::InputError);

  // Probability vector length must match the data.
  LeverageScores ok;
  ok.t = 1.0;
  ok.scores = Eigen::VectorXd::Constant(3, 1.0);
  const SamplingPlan plan = nykrls::leverage_weighted_plan(ok, 2, 0);
  CHECK_THROWS_AS(nykrls::sample_landmarks(plan, x), nykrls::InputError);
}
