#include "nykrls/solvers.hpp"

#include <string>

namespace nykrls {

namespace {

void check_training_input(const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y, double lambda) {
  if (x.rows() < 1) throw InputError("fit: need at least one training point");
  if (x.rows() != y.size())
    throw InputError("fit: " + std::to_string(x.rows()) + " inputs vs " +
                     std::to_string(y.size()) + " targets");
  if (!x.allFinite() || !y.allFinite())
    throw InputError("fit: training data contains non-finite values");
  if (!(lambda > 0.0))
    throw InputError("fit: lambda must be positive, got " + std::to_string(lambda));
}

}  // namespace

ExactModel fit_exact(const Eigen::Ref<const Eigen::MatrixXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y,
                     const KernelSpec& kernel, double lambda, int threads) {
  check_training_input(x, y, lambda);
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c = gram_block(kernel, x, x, threads);
  c.diagonal().array() += lambda * static_cast<double>(n);
  const UpperTriangular r = cholesky(c);
  Eigen::VectorXd alpha = tri_solve(r, y, SolveMode::TransposedFirst);
  alpha = tri_solve(r, alpha, SolveMode::Direct);
  return ExactModel{x, alpha, kernel, lambda};
}

NystromModel fit_nystrom_batch(const Eigen::Ref<const Eigen::MatrixXd>& x,
                               const Eigen::Ref<const Eigen::VectorXd>& y,
                               const Eigen::Ref<const Eigen::MatrixXd>& landmarks,
                               const KernelSpec& kernel, double lambda, int threads) {
  check_training_input(x, y, lambda);
  const Eigen::Index m = landmarks.rows();
  if (m < 1) throw InputError("fit_nystrom_batch: landmark set is empty");
  if (landmarks.cols() != x.cols())
    throw InputError("fit_nystrom_batch: landmark dimension " +
                     std::to_string(landmarks.cols()) + " does not match data dimension " +
                     std::to_string(x.cols()));
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd knm = gram_block(kernel, x, landmarks, threads);
  const Eigen::MatrixXd kmm = gram_block(kernel, landmarks, landmarks, threads);
  // Exactly symmetric normal matrix: accumulate Knm^T Knm on one triangle,
  // mirror it, then add the symmetric landmark block.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  g.selfadjointView<Eigen::Lower>().rankUpdate(knm.transpose());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) g(i, j) = g(j, i);
  g += lambda * static_cast<double>(n) * kmm;
  const Eigen::VectorXd rhs = knm.transpose() * y;
  // Same factorization and recovery ladder as the incremental walker, so a
  // batch refit of any path level reproduces the walker's solution.
  UpperMat r;
  jittered_cholesky(g, r);
  Eigen::VectorXd alpha = tri_solve(r, rhs, SolveMode::TransposedFirst);
  alpha = tri_solve(r, alpha, SolveMode::Direct);
  if (!alpha.allFinite())
    throw Error("fit_nystrom_batch: solver produced non-finite coefficients");
  return NystromModel{landmarks, alpha, kernel, lambda};
}

Eigen::VectorXd predict(const NystromModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& points, int threads) {
  if (points.cols() != model.landmarks.cols())
    throw InputError("predict: point dimension " + std::to_string(points.cols()) +
                     " does not match model dimension " +
                     std::to_string(model.landmarks.cols()));
  return gram_block(model.kernel, points, model.landmarks, threads) * model.alpha;
}

Eigen::VectorXd predict(const ExactModel& model,
                        const Eigen::Ref<const Eigen::MatrixXd>& points, int threads) {
  if (points.cols() != model.points.cols())
    throw InputError("predict: point dimension " + std::to_string(points.cols()) +
                     " does not match model dimension " +
                     std::to_string(model.points.cols()));
  return gram_block(model.kernel, points, model.points, threads) * model.alpha;
}

double rkhs_norm_sq(const NystromModel& model) {
  const Eigen::MatrixXd kmm =
      gram_block(model.kernel, model.landmarks, model.landmarks);
  return model.alpha.dot(kmm * model.alpha);
}

}  // namespace nykrls
