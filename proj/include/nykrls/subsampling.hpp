#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nykrls/kernels.hpp"

namespace nykrls {

inline constexpr Eigen::Index kDefaultDenseCap = 4096;

enum class ScoreExactness { Exact, Approximate };

// Ridge leverage scores at regularization level t. score(i) is the
// statistical weight of point i: the i-th diagonal entry of K (K + t n I)^-1.
struct LeverageScores {
  double t = 0.0;
  Eigen::VectorXd scores;
  ScoreExactness exactness = ScoreExactness::Exact;
  // Smallest multiplicative factor bounding the approximate scores against
  // the exact ones on both sides. Only set when measurement was requested.
  std::optional<double> measured_factor;
};

// Exact scores through a dense factorization of K + t n I. Refuses inputs
// larger than dense_cap points with ResourceError.
LeverageScores leverage_scores_exact(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                     const KernelSpec& kernel, double t,
                                     Eigen::Index dense_cap = kDefaultDenseCap,
                                     int threads = 1);

struct ApproxScoreOptions {
  // Also compute exact scores and record the realized two-sided factor.
  // Diagnostic; subject to dense_cap like any dense n-by-n operation.
  bool measure_factor = false;
  Eigen::Index dense_cap = kDefaultDenseCap;
};

// Sketched scores: a uniform pilot subset of sketch_size points spans a
// low-rank surrogate of the kernel matrix, and scores are computed against
// that surrogate in O(n * sketch_size^2). With sketch_size == n the surrogate
// matches the full kernel matrix up to truncation noise.
LeverageScores leverage_scores_approx(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                      const KernelSpec& kernel, double t,
                                      Eigen::Index sketch_size, std::uint64_t seed,
                                      const ApproxScoreOptions& options = {},
                                      int threads = 1);

enum class SamplingStrategy { PlainUniform, LeverageWeighted };

struct SamplingPlan {
  SamplingStrategy strategy = SamplingStrategy::PlainUniform;
  Eigen::Index m = 1;            // requested landmark count
  std::uint64_t rng_seed = 0;
  Eigen::VectorXd probabilities;  // LeverageWeighted only; sums to one
};

SamplingPlan plain_uniform_plan(Eigen::Index m, std::uint64_t seed);

// Normalizes leverage scores into a sampling distribution.
SamplingPlan leverage_weighted_plan(const LeverageScores& scores, Eigen::Index m,
                                    std::uint64_t seed);

struct LandmarkSample {
  // Selected row indices. PlainUniform: m distinct rows in draw order.
  // LeverageWeighted: i.i.d. draws with duplicates removed, first occurrence
  // kept, so the count may be below the requested m.
  std::vector<Eigen::Index> indices;
  // Raw draw sequence before duplicate removal (equals indices for
  // PlainUniform). Kept so draw frequencies remain observable.
  std::vector<Eigen::Index> draws;
  Eigen::MatrixXd points;  // rows of x at `indices`
};

// Deterministic in (plan, x): the same plan on the same data yields the same
// index sequence on every run and thread count.
LandmarkSample sample_landmarks(const SamplingPlan& plan,
                                const Eigen::Ref<const Eigen::MatrixXd>& x);

}  // namespace nykrls
