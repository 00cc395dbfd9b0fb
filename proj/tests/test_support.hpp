#pragma once

#include <cmath>

#include <Eigen/Core>
#include <Eigen/QR>

#include "nykrls/rng.hpp"

namespace test_support {

inline Eigen::MatrixXd random_matrix(nykrls::Rng& rng, Eigen::Index n, Eigen::Index d,
                                     double scale = 1.0) {
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = scale * rng.normal();
  return x;
}

inline Eigen::VectorXd random_vector(nykrls::Rng& rng, Eigen::Index n,
                                     double scale = 1.0) {
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = scale * rng.normal();
  return y;
}

// Random orthogonal matrix from the QR factorization of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(nykrls::Rng& rng, Eigen::Index n) {
  const Eigen::MatrixXd a = random_matrix(rng, n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

// Symmetric positive definite matrix with the given eigenvalues.
inline Eigen::MatrixXd spd_with_spectrum(nykrls::Rng& rng,
                                         const Eigen::VectorXd& eigenvalues) {
  const Eigen::MatrixXd q = random_orthogonal(rng, eigenvalues.size());
  Eigen::MatrixXd g = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (g + g.transpose());  // exact symmetry for downstream checks
}

// Condition-controlled SPD matrix: eigenvalues log-spaced over [1/cond, 1].
inline Eigen::MatrixXd random_spd(nykrls::Rng& rng, Eigen::Index n,
                                  double cond = 1e3) {
  Eigen::VectorXd vals(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0
                            : static_cast<double>(i) / static_cast<double>(n - 1);
    vals(i) = std::pow(cond, -1.0 + f);  // 1/cond .. 1
  }
  return spd_with_spectrum(rng, vals);
}

}  // namespace test_support
