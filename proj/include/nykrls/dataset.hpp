#pragma once

#include <string>

#include <Eigen/Core>

#include "nykrls/errors.hpp"

namespace nykrls {

// In-memory regression/classification dataset: one row per observation.
struct Dataset {
  Eigen::MatrixXd x;  // n-by-d features
  Eigen::VectorXd y;  // n targets
  Eigen::Index size() const { return x.rows(); }
  Eigen::Index dim() const { return x.cols(); }
};

struct CsvSchema {
  // Zero-based target column; -1 selects the last column.
  int target_column = -1;
  char delimiter = ',';
  bool header = false;
};

// Strict numeric CSV reader. Every field must parse as a finite number; any
// ragged row, non-numeric or non-finite field, or empty file raises DataError
// naming the offending line (1-based, counting the header).
Dataset ingest_csv(const std::string& path, const CsvSchema& schema = {});

// Writes features and target back out with round-trip precision; reading the
// result under the same schema reproduces the dataset exactly.
void write_csv(const Dataset& data, const std::string& path,
               const CsvSchema& schema = {});

// Per-feature affine map to zero mean and unit variance. Statistics come from
// the fitted (training) matrix only; constant features pass through unscaled.
class Standardizer {
 public:
  static Standardizer fit(const Eigen::Ref<const Eigen::MatrixXd>& x);
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  const Eigen::RowVectorXd& mean() const { return mean_; }
  const Eigen::RowVectorXd& scale() const { return scale_; }

 private:
  Eigen::RowVectorXd mean_;
  Eigen::RowVectorXd scale_;
};

}  // namespace nykrls
