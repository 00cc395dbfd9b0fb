#pragma once

#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "nykrls/errors.hpp"

namespace nykrls {

// Row-major storage keeps the row segments touched by the rotation sweeps
// contiguous, which is where incremental updates spend their time.
using UpperMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class UpdateSign { Plus, Minus };
enum class SolveMode { TransposedFirst, Direct };

inline constexpr double kDefaultPinvTol = 1e-12;

namespace detail {

// Largest absolute asymmetry of g relative to its largest entry.
template <typename Derived>
void check_symmetric(const Eigen::MatrixBase<Derived>& g, double rel_tol,
                     const char* context) {
  if (g.rows() != g.cols())
    throw InputError(std::string(context) + ": matrix must be square");
  if (g.rows() == 0) return;
  const double scale = 1.0 + g.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = i + 1; j < g.cols(); ++j)
      if (std::abs(g(i, j) - g(j, i)) > rel_tol * scale)
        throw InputError(std::string(context) + ": matrix is not symmetric at (" +
                         std::to_string(i) + ", " + std::to_string(j) + ")");
}

// Right-looking upper Cholesky of the leading t-by-t block of r, which must
// hold the upper triangle of the input matrix on entry. The block's strict
// lower triangle is zeroed. Throws NotPositiveDefinite with the failing pivot.
template <typename MatT>
void cholesky_in_place(MatT& r, Eigen::Index t) {
  for (Eigen::Index k = 0; k < t; ++k) {
    const double d = r(k, k);
    if (!(d > 0.0))
      throw NotPositiveDefinite(
          "cholesky: pivot " + std::to_string(k) + " is not positive (" +
              std::to_string(d) + ")",
          k);
    const double rkk = std::sqrt(d);
    r(k, k) = rkk;
    for (Eigen::Index j = k + 1; j < t; ++j) r(k, j) /= rkk;
    for (Eigen::Index i = k + 1; i < t; ++i) {
      const double rki = r(k, i);
      if (rki != 0.0)
        for (Eigen::Index j = i; j < t; ++j) r(i, j) -= rki * r(k, j);
    }
  }
  for (Eigen::Index i = 1; i < t; ++i)
    for (Eigen::Index j = 0; j < i; ++j) r(i, j) = 0.0;
}

// Rank-one update (Givens rotations) or downdate (hyperbolic rotations) of the
// leading t-by-t upper factor in r: R'^T R' = R^T R +/- w w^T. w is consumed.
// The Givens form divides by the rotated radius rather than the old diagonal,
// so a zero diagonal entry (a freshly bordered factor) is handled without
// special casing. The hyperbolic sweep checks positivity column by column and
// throws DowndateFailure as soon as the downdated pivot would lose rank; r is
// left partially modified in that case and the caller decides recovery.
template <typename MatT, typename VecT>
void cholup_in_place(MatT& r, VecT& w, Eigen::Index t, UpdateSign sign) {
  if (sign == UpdateSign::Plus) {
    for (Eigen::Index k = 0; k < t; ++k) {
      const double d = r(k, k);
      const double wk = w(k);
      const double rad = std::hypot(d, wk);
      if (rad == 0.0) continue;  // both zero: column untouched
      const double c = d / rad;
      const double s = wk / rad;
      r(k, k) = rad;
      for (Eigen::Index j = k + 1; j < t; ++j) {
        const double rkj = r(k, j);
        const double wj = w(j);
        r(k, j) = c * rkj + s * wj;
        w(j) = c * wj - s * rkj;
      }
    }
  } else {
    for (Eigen::Index k = 0; k < t; ++k) {
      const double d = r(k, k);
      if (!(d > 0.0))
        throw DowndateFailure(
            "cholup: nonpositive diagonal at column " + std::to_string(k), k);
      const double q = w(k) / d;
      const double disc = (1.0 - q) * (1.0 + q);
      if (!(disc > 0.0))
        throw DowndateFailure(
            "cholup: downdate loses positive definiteness at column " +
                std::to_string(k),
            k);
      const double root = std::sqrt(disc);
      const double c = 1.0 / root;
      const double s = q * c;
      r(k, k) = d * root;
      for (Eigen::Index j = k + 1; j < t; ++j) {
        const double rkj = r(k, j);
        const double wj = w(j);
        r(k, j) = c * rkj - s * wj;
        w(j) = c * wj - s * rkj;
      }
    }
  }
}

}  // namespace detail

// Upper triangular factor R with G = R^T R. Invariants: square, strictly
// zero below the diagonal, strictly positive on the diagonal.
class UpperTriangular {
 public:
  UpperTriangular() = default;

  explicit UpperTriangular(UpperMat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw InputError("UpperTriangular: matrix must be square");
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      if (!(m_(i, i) > 0.0))
        throw InputError("UpperTriangular: diagonal entry " + std::to_string(i) +
                         " is not positive");
      for (Eigen::Index j = 0; j < i; ++j)
        if (m_(i, j) != 0.0)
          throw InputError("UpperTriangular: nonzero below diagonal at (" +
                           std::to_string(i) + ", " + std::to_string(j) + ")");
    }
  }

  Eigen::Index order() const { return m_.rows(); }
  const UpperMat& matrix() const { return m_; }

 private:
  UpperMat m_;
};

// Upper Cholesky factor of a symmetric positive definite matrix. Symmetry is
// validated to 1e-10 relative; an indefinite input raises NotPositiveDefinite
// carrying the failing pivot index.
inline UpperTriangular cholesky(const Eigen::Ref<const Eigen::MatrixXd>& g) {
  detail::check_symmetric(g, 1e-10, "cholesky");
  UpperMat r = g;
  detail::cholesky_in_place(r, r.rows());
  return UpperTriangular(std::move(r));
}

// Factor of R^T R + w w^T (Plus) or R^T R - w w^T (Minus). The input factor
// is never modified; Minus throws DowndateFailure when the result would not
// be positive definite.
inline UpperTriangular cholup(const UpperTriangular& r,
                              const Eigen::Ref<const Eigen::VectorXd>& w,
                              UpdateSign sign) {
  if (w.size() != r.order())
    throw InputError("cholup: vector length " + std::to_string(w.size()) +
                     " does not match factor order " + std::to_string(r.order()));
  UpperMat out = r.matrix();
  Eigen::VectorXd wc = w;
  detail::cholup_in_place(out, wc, out.rows(), sign);
  return UpperTriangular(std::move(out));
}

// Triangular solve against any upper triangular matrix expression.
// TransposedFirst solves R^T z = b (the first half of a normal equations
// solve); Direct solves R x = b. A zero diagonal entry raises Error.
template <typename RDerived>
Eigen::VectorXd tri_solve(const Eigen::MatrixBase<RDerived>& r,
                          const Eigen::Ref<const Eigen::VectorXd>& b,
                          SolveMode mode) {
  if (r.rows() != r.cols() || r.rows() != b.size())
    throw InputError("tri_solve: shape mismatch");
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    if (r(i, i) == 0.0)
      throw Error("tri_solve: singular triangular matrix (zero diagonal at " +
                  std::to_string(i) + ")");
  Eigen::VectorXd x = b;
  if (mode == SolveMode::TransposedFirst)
    r.transpose().template triangularView<Eigen::Lower>().solveInPlace(x);
  else
    r.template triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

inline Eigen::VectorXd tri_solve(const UpperTriangular& r,
                                 const Eigen::Ref<const Eigen::VectorXd>& b,
                                 SolveMode mode) {
  return tri_solve(r.matrix(), b, mode);
}

// Upper factor of g, or of g + eps I for the smallest escalating jitter that
// restores numerical positive definiteness: eps starts at 1e-10 tr(g) / t and
// grows by 1e3 twice before the failure propagates. Ridge-regularized normal
// matrices with a unit-diagonal kernel block always land on a rung, since
// tr(g) / t bounds the ridge term from below. Returns the jitter applied
// (zero when none was needed). g must be symmetric; only its upper triangle
// is read.
inline double jittered_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                UpperMat& r) {
  if (g.rows() != g.cols()) throw InputError("jittered_cholesky: matrix must be square");
  const Eigen::Index t = g.rows();
  double eps = 0.0;
  for (int attempt = 0;; ++attempt) {
    r = g;
    if (attempt > 0) r.diagonal().array() += eps;
    try {
      detail::cholesky_in_place(r, t);
      return eps;
    } catch (const NotPositiveDefinite&) {
      if (attempt >= 3) throw;
      eps = attempt == 0 ? 1e-10 * g.trace() / static_cast<double>(t) : eps * 1e3;
    }
  }
}

// Least-norm solve of G X = B for symmetric positive semidefinite G through a
// truncated eigendecomposition: directions with eigenvalue at most
// tol * max(eigenvalue) are dropped rather than amplified.
inline Eigen::MatrixXd pinv_solve(const Eigen::Ref<const Eigen::MatrixXd>& g,
                                  const Eigen::Ref<const Eigen::MatrixXd>& b,
                                  double tol = kDefaultPinvTol) {
  detail::check_symmetric(g, 1e-8, "pinv_solve");
  if (g.rows() != b.rows())
    throw InputError("pinv_solve: right-hand side has " + std::to_string(b.rows()) +
                     " rows, expected " + std::to_string(g.rows()));
  if (!(tol >= 0.0)) throw InputError("pinv_solve: tolerance must be nonnegative");
  if (g.rows() == 0) return Eigen::MatrixXd(0, b.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g);
  if (eig.info() != Eigen::Success)
    throw Error("pinv_solve: eigendecomposition failed");
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double cutoff = tol * std::max(vals.cwiseAbs().maxCoeff(), 0.0);
  Eigen::MatrixXd w = eig.eigenvectors().transpose() * b;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > cutoff && vals(i) > 0.0)
      w.row(i) /= vals(i);
    else
      w.row(i).setZero();
  }
  return eig.eigenvectors() * w;
}

}  // namespace nykrls
