#include "lamp/dataset.hpp"

#include <cmath>
#include <string>

namespace lamp {

Dataset make_dataset(const Eigen::Ref<const Eigen::MatrixXd>& predictors, Eigen::VectorXd y) {
  if (predictors.rows() != y.size())
    throw DataError("make_dataset: predictor rows (" + std::to_string(predictors.rows()) +
                    ") differ from response length (" + std::to_string(y.size()) + ")");
  Dataset d;
  d.X.resize(predictors.rows(), predictors.cols() + 1);
  d.X.col(0).setOnes();
  d.X.rightCols(predictors.cols()) = predictors;
  d.y = std::move(y);
  return d;
}

void validate(const Dataset& data, Family family) {
  const auto n = data.n();
  if (n < 2) throw DataError("dataset needs at least two observations");
  if (data.X.cols() < 1) throw DataError("dataset has no intercept column");
  if (data.y.size() != n) throw DataError("response length does not match design rows");
  if (!(data.X.col(0).array() == 1.0).all())
    throw DataError("column 0 of the design must be identically 1");
  if (!data.X.allFinite()) throw DataError("design contains non-finite entries");
  if (!data.y.allFinite()) throw DataError("response contains non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = data.y(i);
    switch (family.coding()) {
      case ResponseCoding::plus_minus_one:
        if (v != 1.0 && v != -1.0)
          throw DataError("row " + std::to_string(i) + ": binary response must be -1 or +1");
        break;
      case ResponseCoding::nonneg_count:
        if (v < 0 || v != std::floor(v))
          throw DataError("row " + std::to_string(i) + ": count response must be a nonnegative integer");
        break;
      case ResponseCoding::positive_real:
        if (v <= 0) throw DataError("row " + std::to_string(i) + ": response must be positive");
        break;
      case ResponseCoding::real: break;
    }
  }
}

std::pair<Dataset, Standardization> standardize(const Dataset& data) {
  const auto n = static_cast<double>(data.n());
  const auto p = data.p();
  Standardization rec{Eigen::VectorXd(p), Eigen::VectorXd(p)};
  Dataset out = data;
  for (Eigen::Index j = 0; j < p; ++j) {
    auto col = out.X.col(j + 1);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (!(sd > 0.0) || sd < 1e-12 * (1.0 + std::abs(mean)))
      throw DataError("predictor column " + std::to_string(j + 1) + " is constant");
    col /= sd;
    rec.means(j) = mean;
    rec.sds(j) = sd;
  }
  return {std::move(out), std::move(rec)};
}

Eigen::VectorXd destandardize(const Eigen::VectorXd& theta, const Standardization& record) {
  Eigen::VectorXd out(theta.size());
  out.tail(record.sds.size()) = theta.tail(record.sds.size()).cwiseQuotient(record.sds);
  out(0) = theta(0) - out.tail(record.sds.size()).dot(record.means);
  return out;
}

Eigen::VectorXd restandardize(const Eigen::VectorXd& theta, const Standardization& record) {
  Eigen::VectorXd out(theta.size());
  out.tail(record.sds.size()) = theta.tail(record.sds.size()).cwiseProduct(record.sds);
  out(0) = theta(0) + theta.tail(record.sds.size()).dot(record.means);
  return out;
}

Dataset subset_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), data.X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.X.row(static_cast<Eigen::Index>(k)) = data.X.row(rows[k]);
    out.y(static_cast<Eigen::Index>(k)) = data.y(rows[k]);
  }
  return out;
}

}  // namespace lamp
