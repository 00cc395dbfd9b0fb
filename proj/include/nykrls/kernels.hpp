#pragma once

#include <Eigen/Core>

#include "nykrls/errors.hpp"

namespace nykrls {

enum class KernelFamily { Gaussian };

// Positive definite kernel description. Gaussian: k(x, y) = exp(-|x-y|^2 / (2 sigma^2)).
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double sigma = 1.0;
};

// Throws InputError unless sigma is finite and positive.
void validate(const KernelSpec& spec);

// Single kernel evaluation. Bit-identical to the corresponding gram_block entry.
double eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& y);

// Dense kernel block: out(i, j) = k(rows.row(i), cols.row(j)). Entries are
// computed per pair in a fixed order, so gram_block(a, b) equals
// gram_block(b, a) transposed bitwise and results do not depend on `threads`.
Eigen::MatrixXd gram_block(const KernelSpec& spec,
                           const Eigen::Ref<const Eigen::MatrixXd>& rows,
                           const Eigen::Ref<const Eigen::MatrixXd>& cols,
                           int threads = 1);

}  // namespace nykrls
