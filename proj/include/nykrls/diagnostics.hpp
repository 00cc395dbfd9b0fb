#pragma once

#include <Eigen/Core>

#include "nykrls/kernels.hpp"
#include "nykrls/subsampling.hpp"

namespace nykrls {

// Effective dimension of the kernel matrix at ridge level lambda:
// the trace of K (K + lambda n I)^-1, a smooth count of the directions the
// regularized problem can actually resolve. Decreases from n toward zero as
// lambda grows, and equals the sum of the exact leverage scores at t = lambda.
struct EffectiveDimension {
  double lambda = 0.0;
  double value = 0.0;
};

EffectiveDimension effective_dimension(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                       const KernelSpec& kernel, double lambda,
                                       Eigen::Index dense_cap = kDefaultDenseCap,
                                       int threads = 1);

}  // namespace nykrls
