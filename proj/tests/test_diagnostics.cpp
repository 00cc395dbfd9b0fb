#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nykrls/diagnostics.hpp"
#include "test_support.hpp"

using nykrls::KernelSpec;
using test_support::random_matrix;

TEST_CASE("single point value has a closed form") {
  KernelSpec k;
  Eigen::MatrixXd x(1, 1);
  x << 2.0;
  // K = [1], n = 1: value = 1 / (1 + lambda).
  for (double lambda : {1e-2, 1.0, 100.0}) {
    const auto d = nykrls::effective_dimension(x, k, lambda);
    CHECK(d.lambda == lambda);
    CHECK(d.value == doctest::Approx(1.0 / (1.0 + lambda)).epsilon(1e-12));
  }
}

TEST_CASE("well separated points approach full count at light ridge") {
  KernelSpec k;
  k.sigma = 0.05;  // points far apart in kernel units: K is close to identity
  Eigen::MatrixXd x(6, 1);
  x << 0.0, 1.0, 2.0, 3.0, 4.0, 5.0;
  const double n = 6.0;
  const double lambda = 1e-10;
  const auto d = nykrls::effective_dimension(x, k, lambda);
  // Every eigenvalue is near one, so each term is near 1 / (1 + lambda n).
  CHECK(d.value == doctest::Approx(n / (1.0 + lambda * n)).epsilon(1e-6));
}

TEST_CASE("heavy ridge drives the value toward zero") {
  KernelSpec k;
  nykrls::Rng rng(131);
  const Eigen::MatrixXd x = random_matrix(rng, 20, 3);
  const auto d = nykrls::effective_dimension(x, k, 1e8);
  CHECK(d.value < 1e-5);
}

TEST_CASE("value decreases in lambda and respects both bounds") {
  KernelSpec k;
  k.sigma = 1.2;
  nykrls::Rng rng(137);
  const Eigen::MatrixXd x = random_matrix(rng, 30, 2);
  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {1e-6, 1e-4, 1e-2, 1.0, 100.0}) {
    const double v = nykrls::effective_dimension(x, k, lambda).value;
    CHECK(v >= 0.0);
    CHECK(v <= 30.0);
    // trace bound: sum sigma_j / (sigma_j + lambda n) <= tr(K) / (lambda n),
    // and tr(K) = n for a kernel with unit self similarity.
    CHECK(v <= 1.0 / lambda + 1e-12);
    CHECK(v <= previous + 1e-12);
    previous = v;
  }
}

TEST_CASE("matches the eigenvalue sum directly") {
  KernelSpec k;
  k.sigma = 0.7;
  nykrls::Rng rng(139);
  const Eigen::MatrixXd x = random_matrix(rng, 15, 2);
  const double lambda = 3e-3;
  const Eigen::MatrixXd gram = nykrls::gram_block(k, x, x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  double expected = 0.0;
  for (Eigen::Index j = 0; j < 15; ++j) {
    const double v = std::max(eig.eigenvalues()(j), 0.0);
    expected += v / (v + lambda * 15.0);
  }
  CHECK(nykrls::effective_dimension(x, k, lambda).value ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("invalid inputs are rejected") {
  KernelSpec k;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
  CHECK_THROWS_AS(nykrls::effective_dimension(x, k, 0.0), nykrls::InputError);
  CHECK_THROWS_AS(nykrls::effective_dimension(x, k, -1.0), nykrls::InputError);
  CHECK_THROWS_AS(nykrls::effective_dimension(x, k, 1.0, 2),
                  nykrls::ResourceError);
}
