#include "nykrls/kernels.hpp"

#include <cmath>
#include <string>

#include "nykrls/parallel.hpp"

namespace nykrls {

void validate(const KernelSpec& spec) {
  if (spec.family != KernelFamily::Gaussian)
    throw InputError("kernel: unknown family");
  if (!(std::isfinite(spec.sigma) && spec.sigma > 0.0))
    throw InputError("kernel: sigma must be finite and positive, got " +
                     std::to_string(spec.sigma));
}

namespace {

// Shared per-pair evaluation. xi and yj must be unit-stride columns holding
// the two points; sq_x and sq_y their squared norms computed by squaredNorm()
// on the same columns. Routing eval and gram_block through this one function
// is what makes single evaluations bit-identical to block entries.
template <typename ColA, typename ColB>
inline double gaussian_pair(double inv_two_sigma_sq, const ColA& xi, const ColB& yj,
                            double sq_x, double sq_y) {
  double d2 = sq_x + sq_y - 2.0 * xi.dot(yj);
  if (d2 < 0.0) d2 = 0.0;  // rounding can push identical points slightly negative
  return std::exp(-d2 * inv_two_sigma_sq);
}

}  // namespace

double eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& y) {
  validate(spec);
  if (x.size() != y.size())
    throw InputError("kernel eval: dimension mismatch (" + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()) + ")");
  const Eigen::VectorXd xc = x;  // unit-stride copies, same layout as gram columns
  const Eigen::VectorXd yc = y;
  const double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
  return gaussian_pair(inv, xc, yc, xc.squaredNorm(), yc.squaredNorm());
}

Eigen::MatrixXd gram_block(const KernelSpec& spec,
                           const Eigen::Ref<const Eigen::MatrixXd>& rows,
                           const Eigen::Ref<const Eigen::MatrixXd>& cols,
                           int threads) {
  validate(spec);
  if (rows.cols() != cols.cols())
    throw InputError("gram_block: dimension mismatch (" + std::to_string(rows.cols()) +
                     " vs " + std::to_string(cols.cols()) + ")");
  const Eigen::Index nr = rows.rows();
  const Eigen::Index nc = cols.rows();
  // Transposed copies make every point a unit-stride column.
  const Eigen::MatrixXd xt = rows.transpose();
  const Eigen::MatrixXd yt = cols.transpose();
  Eigen::VectorXd sq_x(nr), sq_y(nc);
  for (Eigen::Index i = 0; i < nr; ++i) sq_x(i) = xt.col(i).squaredNorm();
  for (Eigen::Index j = 0; j < nc; ++j) sq_y(j) = yt.col(j).squaredNorm();
  const double inv = 1.0 / (2.0 * spec.sigma * spec.sigma);
  Eigen::MatrixXd out(nr, nc);
  parallel_for(nr, threads, [&](Eigen::Index i) {
    for (Eigen::Index j = 0; j < nc; ++j)
      out(i, j) = gaussian_pair(inv, xt.col(i), yt.col(j), sq_x(i), sq_y(j));
  });
  return out;
}

}  // namespace nykrls
