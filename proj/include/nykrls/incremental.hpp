#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "nykrls/kernels.hpp"
#include "nykrls/linalg.hpp"
#include "nykrls/solvers.hpp"

namespace nykrls {

// Kernel columns for one ordered landmark sequence. Independent of lambda, so
// one cache serves every regularization path over the same sequence.
struct LandmarkColumns {
  Eigen::MatrixXd a_cols;     // n-by-m; column j holds k(landmark_j, x_i) over the data
  Eigen::MatrixXd kmm;        // m-by-m landmark kernel block
  Eigen::MatrixXd landmarks;  // m-by-d landmark inputs
  Eigen::VectorXd aty;        // a_cols^T y
  Eigen::Index n() const { return a_cols.rows(); }
  Eigen::Index count() const { return a_cols.cols(); }
};

LandmarkColumns build_landmark_columns(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                       const Eigen::Ref<const Eigen::VectorXd>& y,
                                       const KernelSpec& kernel,
                                       const Eigen::Ref<const Eigen::MatrixXd>& landmarks,
                                       int threads = 1);

namespace detail {

// Border vectors for growing a factor of G_t to G_{t+1}: with c the coupling
// column and gamma the new diagonal entry, u u^T - v v^T reproduces the
// bordered block [[0, c], [c^T, gamma]], so appending a zero row and column
// to R and applying one update and one downdate yields the grown factor.
void make_border_vectors(const Eigen::Ref<const Eigen::VectorXd>& c, double gamma,
                         Eigen::VectorXd& u, Eigen::VectorXd& v);

}  // namespace detail

// Factor-level walker along one landmark sequence at fixed lambda. Level t
// maintains the upper factor of
//   G_t = A_t^T A_t + lambda n Kmm_t
// where A_t is the first t kernel columns. Each advance costs O(n t + t^2)
// against O(n t^2 + t^3) for refactorizing from scratch. A failed downdate is
// recovered by refactorizing G_t directly, with a trace-scaled jitter if the
// matrix has drifted to numerical semidefiniteness; recoveries are counted.
class PathEngine {
 public:
  // cols must outlive the engine. Levels beyond cols.count() are unreachable.
  PathEngine(const LandmarkColumns& cols, double lambda);

  void advance();  // grow the factor by one landmark
  int level() const { return t_; }
  int recoveries() const { return recoveries_; }

  // Coefficients at the current level: solves R^T R alpha = A_t^T y.
  Eigen::VectorXd alpha() const;

  // Leading level()-by-level() block is the live factor.
  const UpperMat& factor_buffer() const { return r_; }

 private:
  const LandmarkColumns* cols_;
  double lambda_;
  UpperMat r_;
  int t_ = 0;
  int recoveries_ = 0;
};

// Landmark-at-a-time variant that owns its data copies and builds the column
// cache as landmarks arrive, for callers that discover the sequence online.
class CholeskyPathState {
 public:
  int level() const { return t_; }
  double lambda() const { return lambda_; }
  int recoveries() const { return recoveries_; }
  UpperTriangular factor() const;          // live factor (copy)
  Eigen::MatrixXd columns() const;         // A_t (copy)
  Eigen::MatrixXd landmarks() const;       // first t landmark rows (copy)
  Eigen::VectorXd alpha() const;

 private:
  CholeskyPathState() = default;
  void append_landmark(const Eigen::Ref<const Eigen::RowVectorXd>& landmark);
  void ensure_capacity(Eigen::Index needed);

  friend CholeskyPathState path_init(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                     const Eigen::Ref<const Eigen::VectorXd>& y,
                                     const KernelSpec& kernel, double lambda,
                                     const Eigen::Ref<const Eigen::RowVectorXd>& first_landmark);
  friend Eigen::VectorXd path_step(CholeskyPathState& state,
                                   const Eigen::Ref<const Eigen::RowVectorXd>& new_landmark);

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  KernelSpec kernel_;
  double lambda_ = 0.0;
  // Capacity-padded buffers; the leading t_ columns/rows are live.
  Eigen::MatrixXd a_cols_;
  Eigen::MatrixXd kmm_;
  Eigen::MatrixXd lms_;
  Eigen::VectorXd aty_;
  UpperMat r_;
  Eigen::Index t_ = 0;
  int recoveries_ = 0;
};

// Seeds a one-landmark path: the order-one factor is the square root of
// gamma_1 = |a_1|^2 + lambda n k(l_1, l_1), which is positive for any
// positive lambda and kernel with positive self-similarity.
CholeskyPathState path_init(const Eigen::Ref<const Eigen::MatrixXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y,
                            const KernelSpec& kernel, double lambda,
                            const Eigen::Ref<const Eigen::RowVectorXd>& first_landmark);

// Appends one landmark and returns the coefficients at the new level.
Eigen::VectorXd path_step(CholeskyPathState& state,
                          const Eigen::Ref<const Eigen::RowVectorXd>& new_landmark);

struct PathLevelRecord {
  int t = 0;
  double lambda = 0.0;
  double seconds = 0.0;  // cumulative path time when this level was emitted
};

using PathEmit = std::function<void(const PathLevelRecord&, const Eigen::VectorXd& alpha)>;

struct PathOptions {
  // Levels at which coefficients are produced, ascending; empty means all.
  std::vector<int> levels;
  bool collect_models = true;
  // Reconstruct G_t at every emitted level and track the worst relative
  // factor deviation. Costly; meant for tests.
  bool diagnostics = false;
  int threads = 1;
};

struct PathStats {
  int recoveries = 0;
  double max_factor_rel_err = 0.0;  // only filled in diagnostics mode
};

// Runs the full path over an ordered landmark sequence, emitting coefficients
// at the requested levels. Returns the per-level models in emission order
// (empty when collect_models is off).
std::vector<NystromModel> run_path(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const KernelSpec& kernel, double lambda,
                                   const Eigen::Ref<const Eigen::MatrixXd>& landmark_seq,
                                   const PathOptions& options = {},
                                   const PathEmit& emit = nullptr,
                                   PathStats* stats = nullptr);

}  // namespace nykrls
