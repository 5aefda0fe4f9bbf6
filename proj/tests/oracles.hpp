#pragma once

// Test-side reference computations. Nothing here calls into the library's
// numerical code, so agreement is a real cross-check.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

// Five-point central difference.
inline double diff(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

inline double diff2(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Cumulants in long double from textbook formulas.
enum class Cum { gaussian, logistic, poisson, gamma, inverse_gaussian, probit };

inline long double cumulant(Cum c, long double x) {
  switch (c) {
    case Cum::gaussian: return x * x / 2;
    case Cum::logistic: return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    case Cum::poisson: return std::exp(x);
    case Cum::gamma: return -std::log(-x);
    case Cum::inverse_gaussian: return -std::sqrt(-2 * x);
    case Cum::probit: return -std::log(0.5L * std::erfc(x / std::sqrt(2.0L)));
  }
  return 0;
}

inline long double cumulant_d1(Cum c, long double x) {
  switch (c) {
    case Cum::gaussian: return x;
    case Cum::logistic: return 1 / (1 + std::exp(-x));
    case Cum::poisson: return std::exp(x);
    case Cum::gamma: return -1 / x;
    case Cum::inverse_gaussian: return 1 / std::sqrt(-2 * x);
    case Cum::probit: {
      const long double pdf = std::exp(-x * x / 2) / std::sqrt(2 * 3.14159265358979323846L);
      return pdf / (0.5L * std::erfc(x / std::sqrt(2.0L)));
    }
  }
  return 0;
}

// LAMP penalty straight from its definition.
inline long double lamp_value(Cum c, long double lambda, long double lambda0, long double alpha1, long double beta) {
  return lambda * lambda / (cumulant_d1(c, alpha1) * lambda0) *
         (cumulant(c, alpha1) - cumulant(c, alpha1 - lambda0 / lambda * beta));
}

inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Coarse-to-fine grid search of f over a box; each round re-centres on the
// best point and shrinks the box.
inline Eigen::VectorXd grid_minimize(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd centre,
                                     double half_width, int points = 21, double final_width = 1e-7) {
  const auto d = centre.size();
  double w = half_width;
  while (w > final_width) {
    Eigen::VectorXd best = centre;
    double best_val = f(centre);
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
      Eigen::VectorXd x(d);
      for (Eigen::Index k = 0; k < d; ++k)
        x(k) = centre(k) - w + 2 * w * idx[static_cast<std::size_t>(k)] / (points - 1);
      const double v = f(x);
      if (v < best_val) {
        best_val = v;
        best = x;
      }
      Eigen::Index k = 0;
      while (k < d && ++idx[static_cast<std::size_t>(k)] == points) idx[static_cast<std::size_t>(k++)] = 0;
      if (k == d) break;
    }
    centre = best;
    w *= 4.0 / (points - 1);
  }
  return centre;
}

// Least squares by normal equations.
inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return (X.transpose() * X).ldlt().solve(X.transpose() * y);
}

// Columns centred and scaled to 1/n variance by hand.
inline Eigen::MatrixXd standardized(Eigen::MatrixXd P) {
  const double n = static_cast<double>(P.rows());
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    const double m = P.col(j).sum() / n;
    P.col(j).array() -= m;
    const double sd = std::sqrt(P.col(j).squaredNorm() / n);
    P.col(j) /= sd;
  }
  return P;
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = z(rng);
  return M;
}

}  // namespace oracle
