#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lamp/family.hpp"

namespace lamp {

/// Design matrix with a leading intercept column of ones, plus the response
/// in family coding (binary families use -1/+1).
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;

  Eigen::Index n() const { return X.rows(); }
  // Number of penalized predictors (intercept excluded).
  Eigen::Index p() const { return X.cols() - 1; }
};

/// Column statistics of the non-intercept predictors (1/n variance).
struct Standardization {
  Eigen::VectorXd means;
  Eigen::VectorXd sds;

  static Standardization identity(Eigen::Index p) {
    return {Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p)};
  }
};

/// Prepends the intercept column to an n x p predictor block.
Dataset make_dataset(const Eigen::Ref<const Eigen::MatrixXd>& predictors, Eigen::VectorXd y);

/// Structural checks: intercept column, n >= 2, finite cells, response coding.
void validate(const Dataset& data, Family family);

/// Centers and scales every predictor column. Throws DataError naming the
/// first zero-variance column.
std::pair<Dataset, Standardization> standardize(const Dataset& data);

/// Maps standardized-scale coefficients back to the original predictors.
Eigen::VectorXd destandardize(const Eigen::VectorXd& theta, const Standardization& record);

/// Inverse of destandardize.
Eigen::VectorXd restandardize(const Eigen::VectorXd& theta, const Standardization& record);

/// Rows selected by index, keeping the intercept column.
Dataset subset_rows(const Dataset& data, const std::vector<Eigen::Index>& rows);

}  // namespace lamp
