#include "nykrls/incremental.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace nykrls {

LandmarkColumns build_landmark_columns(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                       const Eigen::Ref<const Eigen::VectorXd>& y,
                                       const KernelSpec& kernel,
                                       const Eigen::Ref<const Eigen::MatrixXd>& landmarks,
                                       int threads) {
  if (x.rows() < 1) throw InputError("landmark columns: empty data");
  if (x.rows() != y.size())
    throw InputError("landmark columns: " + std::to_string(x.rows()) + " inputs vs " +
                     std::to_string(y.size()) + " targets");
  if (landmarks.rows() < 1) throw InputError("landmark columns: empty landmark set");
  if (landmarks.cols() != x.cols())
    throw InputError("landmark columns: dimension mismatch");
  if (!x.allFinite() || !y.allFinite() || !landmarks.allFinite())
    throw InputError("landmark columns: non-finite input");
  LandmarkColumns cols;
  cols.a_cols = gram_block(kernel, x, landmarks, threads);
  cols.kmm = gram_block(kernel, landmarks, landmarks, threads);
  cols.landmarks = landmarks;
  cols.aty = cols.a_cols.transpose() * y;
  return cols;
}

namespace detail {

void make_border_vectors(const Eigen::Ref<const Eigen::VectorXd>& c, double gamma,
                         Eigen::VectorXd& u, Eigen::VectorXd& v) {
  const Eigen::Index t = c.size() + 1;
  const double g = std::sqrt(1.0 + gamma);
  u.resize(t);
  v.resize(t);
  u.head(t - 1) = c / (1.0 + g);
  u(t - 1) = g;
  v.head(t - 1) = u.head(t - 1);
  v(t - 1) = -1.0;
}

}  // namespace detail

namespace {

// Rebuilds G_t = A_t^T A_t + lambda n Kmm_t and refactors it into the
// leading block of r through the shared jitter ladder. Used for downdate
// recovery.
void refactor_level(UpperMat& r, const Eigen::MatrixXd& a_cols,
                    const Eigen::MatrixXd& kmm, double lambda, Eigen::Index n,
                    Eigen::Index t) {
  const double ln = lambda * static_cast<double>(n);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(t, t);
  g.selfadjointView<Eigen::Lower>().rankUpdate(
      a_cols.leftCols(t).topRows(n).transpose());
  for (Eigen::Index i = 0; i < t; ++i)
    for (Eigen::Index j = i + 1; j < t; ++j) g(i, j) = g(j, i);
  g += ln * kmm.topLeftCorner(t, t);
  UpperMat fresh;
  jittered_cholesky(g, fresh);
  r.topLeftCorner(t, t) = fresh;
}

// Grows the factor in r from level t_new - 1 to t_new. Buffers may be
// capacity-padded; only the leading t_new columns of a_cols and block of kmm
// are read. The new row and column of r must be zero on entry. Returns true
// when a downdate failure forced a refactorization.
bool advance_factor(UpperMat& r, const Eigen::MatrixXd& a_cols,
                    const Eigen::MatrixXd& kmm, double lambda, Eigen::Index n,
                    Eigen::Index t_new) {
  const Eigen::Index j = t_new - 1;
  const double ln = lambda * static_cast<double>(n);
  const auto a = a_cols.col(j).head(n);
  const double gamma = a.squaredNorm() + ln * kmm(j, j);
  if (t_new == 1) {
    if (!(gamma > 0.0))
      throw Error("incremental path: first diagonal entry is not positive");
    r(0, 0) = std::sqrt(gamma);
    return false;
  }
  Eigen::VectorXd c(j);
  c.noalias() = a_cols.leftCols(j).topRows(n).transpose() * a;
  c.noalias() += ln * kmm.col(j).head(j);
  Eigen::VectorXd u, v;
  detail::make_border_vectors(c, gamma, u, v);
  detail::cholup_in_place(r, u, t_new, UpdateSign::Plus);
  try {
    detail::cholup_in_place(r, v, t_new, UpdateSign::Minus);
    return false;
  } catch (const DowndateFailure&) {
    refactor_level(r, a_cols, kmm, lambda, n, t_new);
    return true;
  }
}

Eigen::VectorXd solve_alpha(const UpperMat& r, const Eigen::VectorXd& aty,
                            Eigen::Index t) {
  if (t < 1) throw InputError("incremental path: no landmarks yet");
  const auto rt = r.topLeftCorner(t, t);
  Eigen::VectorXd z = tri_solve(rt, aty.head(t), SolveMode::TransposedFirst);
  return tri_solve(rt, z, SolveMode::Direct);
}

}  // namespace

PathEngine::PathEngine(const LandmarkColumns& cols, double lambda)
    : cols_(&cols), lambda_(lambda) {
  if (!(lambda > 0.0))
    throw InputError("path engine: lambda must be positive, got " +
                     std::to_string(lambda));
  if (cols.count() < 1) throw InputError("path engine: empty column cache");
  if (cols.aty.size() != cols.count() || cols.kmm.rows() != cols.count())
    throw InputError("path engine: inconsistent column cache");
  r_ = UpperMat::Zero(cols.count(), cols.count());
}

void PathEngine::advance() {
  if (t_ >= cols_->count())
    throw InputError("path engine: past the end of the landmark sequence");
  if (advance_factor(r_, cols_->a_cols, cols_->kmm, lambda_, cols_->n(), t_ + 1))
    ++recoveries_;
  ++t_;
}

Eigen::VectorXd PathEngine::alpha() const { return solve_alpha(r_, cols_->aty, t_); }

UpperTriangular CholeskyPathState::factor() const {
  return UpperTriangular(r_.topLeftCorner(t_, t_));
}

Eigen::MatrixXd CholeskyPathState::columns() const {
  return a_cols_.leftCols(t_);
}

Eigen::MatrixXd CholeskyPathState::landmarks() const { return lms_.topRows(t_); }

Eigen::VectorXd CholeskyPathState::alpha() const { return solve_alpha(r_, aty_, t_); }

void CholeskyPathState::ensure_capacity(Eigen::Index needed) {
  const Eigen::Index cap = a_cols_.cols();
  if (needed <= cap) return;
  Eigen::Index grown = cap < 8 ? 8 : cap;
  while (grown < needed) grown *= 2;
  Eigen::MatrixXd a(x_.rows(), grown);
  a.leftCols(t_) = a_cols_.leftCols(t_);
  a_cols_.swap(a);
  Eigen::MatrixXd km = Eigen::MatrixXd::Zero(grown, grown);
  km.topLeftCorner(t_, t_) = kmm_.topLeftCorner(t_, t_);
  kmm_.swap(km);
  Eigen::MatrixXd lm(grown, x_.cols());
  lm.topRows(t_) = lms_.topRows(t_);
  lms_.swap(lm);
  Eigen::VectorXd at(grown);
  at.head(t_) = aty_.head(t_);
  aty_.swap(at);
  UpperMat r = UpperMat::Zero(grown, grown);
  r.topLeftCorner(t_, t_) = r_.topLeftCorner(t_, t_);
  r_.swap(r);
}

void CholeskyPathState::append_landmark(
    const Eigen::Ref<const Eigen::RowVectorXd>& landmark) {
  if (landmark.size() != x_.cols())
    throw InputError("path step: landmark dimension " + std::to_string(landmark.size()) +
                     " does not match data dimension " + std::to_string(x_.cols()));
  if (!landmark.allFinite()) throw InputError("path step: non-finite landmark");
  ensure_capacity(t_ + 1);
  const Eigen::VectorXd a = gram_block(kernel_, x_, landmark).col(0);
  a_cols_.col(t_) = a;
  if (t_ > 0) {
    const Eigen::VectorXd b = gram_block(kernel_, lms_.topRows(t_), landmark).col(0);
    kmm_.col(t_).head(t_) = b;
    kmm_.row(t_).head(t_) = b.transpose();
  }
  kmm_(t_, t_) = eval(kernel_, landmark.transpose(), landmark.transpose());
  lms_.row(t_) = landmark;
  aty_(t_) = a.dot(y_);
  if (advance_factor(r_, a_cols_, kmm_, lambda_, x_.rows(), t_ + 1)) ++recoveries_;
  ++t_;
}

CholeskyPathState path_init(const Eigen::Ref<const Eigen::MatrixXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            const KernelSpec& kernel, double lambda,
                            const Eigen::Ref<const Eigen::RowVectorXd>& first_landmark) {
  if (x.rows() < 1) throw InputError("path_init: empty data");
  if (x.rows() != y.size())
    throw InputError("path_init: " + std::to_string(x.rows()) + " inputs vs " +
                     std::to_string(y.size()) + " targets");
  if (!x.allFinite() || !y.allFinite())
    throw InputError("path_init: non-finite training data");
  if (!(lambda > 0.0))
    throw InputError("path_init: lambda must be positive, got " +
                     std::to_string(lambda));
  validate(kernel);
  CholeskyPathState state;
  state.x_ = x;
  state.y_ = y;
  state.kernel_ = kernel;
  state.lambda_ = lambda;
  state.append_landmark(first_landmark);
  return state;
}

Eigen::VectorXd path_step(CholeskyPathState& state,
                          const Eigen::Ref<const Eigen::RowVectorXd>& new_landmark) {
  state.append_landmark(new_landmark);
  return state.alpha();
}

std::vector<NystromModel> run_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const KernelSpec& kernel, double lambda,
                                   const Eigen::Ref<const Eigen::MatrixXd>& landmark_seq,
                                   const PathOptions& options, const PathEmit& emit,
                                   PathStats* stats) {
  if (!(lambda > 0.0))
    throw InputError("run_path: lambda must be positive, got " +
                     std::to_string(lambda));
  const LandmarkColumns cols =
      build_landmark_columns(x, y, kernel, landmark_seq, options.threads);
  const Eigen::Index m = cols.count();
  std::vector<int> levels = options.levels;
  if (levels.empty()) {
    levels.resize(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) levels[static_cast<std::size_t>(i)] =
        static_cast<int>(i) + 1;
  }
  int prev = 0;
  for (int lvl : levels) {
    if (lvl <= prev || lvl > m)
      throw InputError("run_path: levels must be strictly ascending within the sequence");
    prev = lvl;
  }
  const double ln = lambda * static_cast<double>(cols.n());
  PathEngine engine(cols, lambda);
  std::vector<NystromModel> models;
  if (options.collect_models) models.reserve(levels.size());
  PathStats local;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t li = 0;
  for (Eigen::Index t = 1; t <= m && li < levels.size(); ++t) {
    engine.advance();
    if (levels[li] != static_cast<int>(t)) continue;
    ++li;
    const Eigen::VectorXd alpha = engine.alpha();
    if (options.diagnostics) {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(t, t);
      g.selfadjointView<Eigen::Lower>().rankUpdate(cols.a_cols.leftCols(t).transpose());
      for (Eigen::Index i = 0; i < t; ++i)
        for (Eigen::Index j = i + 1; j < t; ++j) g(i, j) = g(j, i);
      g += ln * cols.kmm.topLeftCorner(t, t);
      const auto r = engine.factor_buffer().topLeftCorner(t, t);
      const double rel = (r.transpose() * r - g).norm() / g.norm();
      local.max_factor_rel_err = std::max(local.max_factor_rel_err, rel);
    }
    if (emit) {
      PathLevelRecord rec;
      rec.t = static_cast<int>(t);
      rec.lambda = lambda;
      rec.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      emit(rec, alpha);
    }
    if (options.collect_models)
      models.push_back(NystromModel{landmark_seq.topRows(t), alpha, kernel, lambda});
  }
  local.recoveries = engine.recoveries();
  if (stats) *stats = local;
  return models;
}

}  // namespace nykrls
