#include "nykrls/subsampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "nykrls/linalg.hpp"
#include "nykrls/rng.hpp"

namespace nykrls {

namespace {

void check_score_input(const Eigen::Ref<const Eigen::MatrixXd>& x, double t) {
  if (x.rows() < 1) throw InputError("leverage scores: need at least one point");
  if (!x.allFinite()) throw InputError("leverage scores: non-finite input");
  if (!(t > 0.0))
    throw InputError("leverage scores: t must be positive, got " + std::to_string(t));
}

void check_dense_cap(Eigen::Index n, Eigen::Index cap, const char* what) {
  if (n > cap)
    throw ResourceError(std::string(what) + ": dense operation on " +
                        std::to_string(n) + " points exceeds cap " +
                        std::to_string(cap));
}

}  // namespace

LeverageScores leverage_scores_exact(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                     const KernelSpec& kernel, double t,
                                     Eigen::Index dense_cap, int threads) {
  check_score_input(x, t);
  const Eigen::Index n = x.rows();
  check_dense_cap(n, dense_cap, "leverage_scores_exact");
  const Eigen::MatrixXd k = gram_block(kernel, x, x, threads);
  Eigen::MatrixXd reg = k;
  reg.diagonal().array() += t * static_cast<double>(n);
  const UpperTriangular r = cholesky(reg);
  // score(i) = k_i^T (K + t n I)^-1 e_i = ((K + t n I)^-1 K)_{ii}; solved
  // columnwise through the factor rather than an eigendecomposition so the
  // eigenvalue route stays available as an independent cross-check.
  Eigen::MatrixXd s = k;
  r.matrix().transpose().triangularView<Eigen::Lower>().solveInPlace(s);
  r.matrix().triangularView<Eigen::Upper>().solveInPlace(s);
  LeverageScores out;
  out.t = t;
  out.scores = s.diagonal().cwiseMax(0.0).cwiseMin(1.0);
  out.exactness = ScoreExactness::Exact;
  return out;
}

LeverageScores leverage_scores_approx(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                      const KernelSpec& kernel, double t,
                                      Eigen::Index sketch_size, std::uint64_t seed,
                                      const ApproxScoreOptions& options, int threads) {
  check_score_input(x, t);
  const Eigen::Index n = x.rows();
  if (sketch_size < 1)
    throw InputError("leverage_scores_approx: sketch_size must be at least 1");
  if (sketch_size > n)
    throw InputError("leverage_scores_approx: sketch_size " +
                     std::to_string(sketch_size) + " exceeds data size " +
                     std::to_string(n));
  // Uniform pilot subset spanning the surrogate kernel matrix.
  const LandmarkSample pilot =
      sample_landmarks(plain_uniform_plan(sketch_size, seed), x);
  const Eigen::MatrixXd c = gram_block(kernel, x, pilot.points, threads);
  const Eigen::MatrixXd w = gram_block(kernel, pilot.points, pilot.points, threads);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
  if (eig.info() != Eigen::Success)
    throw Error("leverage_scores_approx: pilot eigendecomposition failed");
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double cutoff = kDefaultPinvTol * std::max(vals.maxCoeff(), 0.0);
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals(i) > cutoff && vals(i) > 0.0) ++kept;
  if (kept == 0) throw Error("leverage_scores_approx: pilot block is numerically zero");
  // Feature map phi with phi phi^T equal to the surrogate kernel matrix
  // C W^+ C^T; columns ordered from the largest retained eigenvalue down.
  Eigen::MatrixXd phi(n, kept);
  Eigen::Index col = 0;
  for (Eigen::Index i = vals.size() - 1; i >= 0; --i) {
    if (!(vals(i) > cutoff && vals(i) > 0.0)) continue;
    phi.col(col++) = (c * eig.eigenvectors().col(i)) / std::sqrt(vals(i));
  }
  // score(i) = phi_i^T (phi^T phi + t n I)^-1 phi_i, the surrogate's exact score.
  Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(kept, kept);
  inner.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
  for (Eigen::Index i = 0; i < kept; ++i)
    for (Eigen::Index j = i + 1; j < kept; ++j) inner(i, j) = inner(j, i);
  inner.diagonal().array() += t * static_cast<double>(n);
  const UpperTriangular r = cholesky(inner);
  Eigen::MatrixXd z = phi.transpose();
  r.matrix().transpose().triangularView<Eigen::Lower>().solveInPlace(z);
  LeverageScores out;
  out.t = t;
  out.scores = z.colwise().squaredNorm().transpose().cwiseMin(1.0);
  out.exactness = ScoreExactness::Approximate;
  if (options.measure_factor) {
    const LeverageScores exact =
        leverage_scores_exact(x, kernel, t, options.dense_cap, threads);
    double factor = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = out.scores(i);
      const double e = exact.scores(i);
      if (a <= 0.0 || e <= 0.0) {
        if (a != e) factor = std::numeric_limits<double>::infinity();
        continue;
      }
      factor = std::max(factor, std::max(a / e, e / a));
    }
    out.measured_factor = factor;
  }
  return out;
}

SamplingPlan plain_uniform_plan(Eigen::Index m, std::uint64_t seed) {
  if (m < 1) throw InputError("sampling plan: m must be at least 1");
  SamplingPlan plan;
  plan.strategy = SamplingStrategy::PlainUniform;
  plan.m = m;
  plan.rng_seed = seed;
  return plan;
}

SamplingPlan leverage_weighted_plan(const LeverageScores& scores, Eigen::Index m,
                                    std::uint64_t seed) {
  if (m < 1) throw InputError("sampling plan: m must be at least 1");
  if (scores.scores.size() < 1)
    throw InputError("sampling plan: empty score vector");
  if ((scores.scores.array() < 0.0).any())
    throw InputError("sampling plan: negative leverage score");
  const double total = scores.scores.sum();
  if (!(total > 0.0))
    throw InputError("sampling plan: leverage scores sum to zero");
  SamplingPlan plan;
  plan.strategy = SamplingStrategy::LeverageWeighted;
  plan.m = m;
  plan.rng_seed = seed;
  plan.probabilities = scores.scores / total;
  return plan;
}

LandmarkSample sample_landmarks(const SamplingPlan& plan,
                                const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const Eigen::Index n = x.rows();
  if (n < 1) throw InputError("sample_landmarks: empty data");
  if (plan.m < 1) throw InputError("sample_landmarks: m must be at least 1");
  Rng rng(plan.rng_seed);
  LandmarkSample out;
  if (plan.strategy == SamplingStrategy::PlainUniform) {
    if (plan.m > n)
      throw InputError("sample_landmarks: m " + std::to_string(plan.m) +
                       " exceeds data size " + std::to_string(n) +
                       " for uniform sampling without replacement");
    // Partial Fisher-Yates: the first m slots of a virtual permutation.
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (Eigen::Index i = 0; i < plan.m; ++i) {
      const Eigen::Index j =
          i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(plan.m));
    out.indices = idx;
    out.draws = std::move(idx);
  } else {
    if (plan.probabilities.size() != n)
      throw InputError("sample_landmarks: probability vector has " +
                       std::to_string(plan.probabilities.size()) +
                       " entries for " + std::to_string(n) + " points");
    if ((plan.probabilities.array() < 0.0).any())
      throw InputError("sample_landmarks: negative probability");
    const double total = plan.probabilities.sum();
    if (std::abs(total - 1.0) > 1e-12)
      throw InputError("sample_landmarks: probabilities sum to " +
                       std::to_string(total) + ", expected 1");
    Eigen::VectorXd cum(n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += plan.probabilities(i);
      cum(i) = acc;
    }
    // i.i.d. draws with replacement; duplicates removed, first occurrence kept.
    out.draws.reserve(static_cast<std::size_t>(plan.m));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (Eigen::Index d = 0; d < plan.m; ++d) {
      const double u = rng.uniform() * cum(n - 1);
      Eigen::Index lo = 0, hi = n - 1;
      while (lo < hi) {  // first index with cum > u
        const Eigen::Index mid = (lo + hi) / 2;
        if (cum(mid) > u)
          hi = mid;
        else
          lo = mid + 1;
      }
      out.draws.push_back(lo);
      if (!seen[static_cast<std::size_t>(lo)]) {
        seen[static_cast<std::size_t>(lo)] = 1;
        out.indices.push_back(lo);
      }
    }
  }
  out.points.resize(static_cast<Eigen::Index>(out.indices.size()), x.cols());
  for (std::size_t i = 0; i < out.indices.size(); ++i)
    out.points.row(static_cast<Eigen::Index>(i)) = x.row(out.indices[i]);
  return out;
}

}  // namespace nykrls
