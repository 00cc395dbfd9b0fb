#pragma once

#include <Eigen/Core>

#include "nykrls/kernels.hpp"
#include "nykrls/linalg.hpp"

namespace nykrls {

// Kernel regression on a landmark subset: f(x) = sum_j alpha_j k(landmark_j, x).
struct NystromModel {
  Eigen::MatrixXd landmarks;  // m-by-d, one landmark per row
  Eigen::VectorXd alpha;      // m coefficients
  KernelSpec kernel;
  double lambda = 0.0;
  Eigen::Index count() const { return landmarks.rows(); }
};

// Full kernel regression over all training points.
struct ExactModel {
  Eigen::MatrixXd points;  // n-by-d training inputs
  Eigen::VectorXd alpha;   // n coefficients
  KernelSpec kernel;
  double lambda = 0.0;
};

// Solves (K + lambda n I) alpha = y through a dense Cholesky factorization.
ExactModel fit_exact(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y,
                     const KernelSpec& kernel, double lambda, int threads = 1);

// Landmark regression coefficients from the normal equations
//   (Knm^T Knm + lambda n Kmm) alpha = Knm^T y,
// factored by the same jitter-escalating Cholesky the incremental path uses,
// so rank-deficient landmark sets (duplicates, near-coincident points) stay
// well defined and batch refits agree with the incremental walker.
NystromModel fit_nystrom_batch(const Eigen::Ref<const Eigen::MatrixXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y,
                               const Eigen::Ref<const Eigen::MatrixXd>& landmarks,
                               const KernelSpec& kernel, double lambda,
                               int threads = 1);

Eigen::VectorXd predict(const NystromModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& points,
                        int threads = 1);

Eigen::VectorXd predict(const ExactModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& points,
                        int threads = 1);

// Squared function norm alpha^T Kmm alpha of the landmark expansion; the
// quantity the ridge penalty multiplies.
double rkhs_norm_sq(const NystromModel& model);

}  // namespace nykrls
