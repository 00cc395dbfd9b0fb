#include "nykrls/diagnostics.hpp"

#include <string>

#include <Eigen/Eigenvalues>

#include "nykrls/errors.hpp"

namespace nykrls {

EffectiveDimension effective_dimension(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                       const KernelSpec& kernel, double lambda,
                                       Eigen::Index dense_cap, int threads) {
  if (x.rows() < 1) throw InputError("effective_dimension: empty data");
  if (!x.allFinite()) throw InputError("effective_dimension: non-finite input");
  if (!(lambda > 0.0))
    throw InputError("effective_dimension: lambda must be positive, got " +
                     std::to_string(lambda));
  const Eigen::Index n = x.rows();
  if (n > dense_cap)
    throw ResourceError("effective_dimension: dense operation on " +
                        std::to_string(n) + " points exceeds cap " +
                        std::to_string(dense_cap));
  const Eigen::MatrixXd k = gram_block(kernel, x, x, threads);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw Error("effective_dimension: eigendecomposition failed");
  const double reg = lambda * static_cast<double>(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    // Rounding can push small kernel eigenvalues slightly negative; such
    // directions contribute nothing.
    const double s = std::max(eig.eigenvalues()(i), 0.0);
    total += s / (s + reg);
  }
  return EffectiveDimension{lambda, total};
}

}  // namespace nykrls
