#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "lamp/errors.hpp"
#include "lamp/normal.hpp"

namespace lamp {

enum class FamilyKind { gaussian, logistic, poisson, gamma, inverse_gaussian, probit };

enum class ResponseCoding { real, plus_minus_one, nonneg_count, positive_real };

/// A GLM family identified by its cumulant g. The dispersion is fixed at one.
///
/// Binary families (logistic, probit) are evaluated in margin form: the
/// per-observation loss is g(-y xi) with y in {-1, +1}.
class Family {
 public:
  constexpr explicit Family(FamilyKind kind = FamilyKind::gaussian) : kind_(kind) {}

  static Family from_name(std::string_view name);

  constexpr FamilyKind kind() const { return kind_; }
  std::string_view name() const;

  constexpr bool is_binary() const {
    return kind_ == FamilyKind::logistic || kind_ == FamilyKind::probit;
  }

  // The xi-domain is either all reals or (-inf, 0).
  constexpr bool negative_domain() const {
    return kind_ == FamilyKind::gamma || kind_ == FamilyKind::inverse_gaussian;
  }
  constexpr double domain_upper() const {
    return negative_domain() ? 0.0 : std::numeric_limits<double>::infinity();
  }
  template <class Scalar>
  constexpr bool in_domain(Scalar xi) const {
    return negative_domain() ? xi < Scalar(0) : std::isfinite(static_cast<double>(xi));
  }

  ResponseCoding coding() const;

  /// Default location parameter for the LAMP generated by this family.
  double default_alpha1() const;

  friend constexpr bool operator==(Family a, Family b) { return a.kind_ == b.kind_; }

 private:
  FamilyKind kind_;
};

namespace detail {
[[noreturn]] void throw_domain(Family family, double xi);

template <class Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= 0) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

template <class Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  return (x > 0 ? x : Scalar(0)) + log1p(exp(-(x > 0 ? x : -x)));
}
}  // namespace detail

/// g(xi)
template <class Scalar>
Scalar cumulant(Family family, Scalar xi) {
  using std::exp;
  using std::log;
  using std::sqrt;
  if (!family.in_domain(xi)) detail::throw_domain(family, static_cast<double>(xi));
  switch (family.kind()) {
    case FamilyKind::gaussian: return xi * xi / Scalar(2);
    case FamilyKind::logistic: return detail::softplus(xi);
    case FamilyKind::poisson: return exp(xi);
    case FamilyKind::gamma: return -log(-xi);
    case FamilyKind::inverse_gaussian: return -sqrt(Scalar(-2) * xi);
    case FamilyKind::probit: return -normal::log_cdf(-xi);
  }
  return Scalar(0);
}

/// g^(order)(xi) for order in {1, 2, 3}.
template <class Scalar>
Scalar cumulant_deriv(Family family, Scalar xi, int order) {
  using std::exp;
  using std::pow;
  if (order < 1 || order > 3) throw ContractError("cumulant_deriv: order must be 1, 2 or 3");
  if (!family.in_domain(xi)) detail::throw_domain(family, static_cast<double>(xi));
  switch (family.kind()) {
    case FamilyKind::gaussian: return order == 1 ? xi : (order == 2 ? Scalar(1) : Scalar(0));
    case FamilyKind::logistic: {
      const Scalar s = detail::sigmoid(xi);
      if (order == 1) return s;
      const Scalar v = s * detail::sigmoid(-xi);
      return order == 2 ? v : v * (Scalar(1) - Scalar(2) * s);
    }
    case FamilyKind::poisson: return exp(xi);
    case FamilyKind::gamma:
      if (order == 1) return Scalar(-1) / xi;
      if (order == 2) return Scalar(1) / (xi * xi);
      return Scalar(-2) / (xi * xi * xi);
    case FamilyKind::inverse_gaussian: {
      const Scalar t = Scalar(-2) * xi;
      if (order == 1) return pow(t, Scalar(-0.5));
      if (order == 2) return pow(t, Scalar(-1.5));
      return Scalar(3) * pow(t, Scalar(-2.5));
    }
    case FamilyKind::probit: {
      // h = phi(xi)/Phi(-xi); g'' = h (h - xi); g''' = g''(h - xi) + h (g'' - 1)
      const Scalar h = normal::mills_hazard(xi);
      if (order == 1) return h;
      const Scalar excess = normal::mills_hazard_excess(xi);
      const Scalar g2 = h * excess;
      if (order == 2) return g2;
      return g2 * excess + h * (g2 - Scalar(1));
    }
  }
  return Scalar(0);
}

/// Per-observation negative log-likelihood and its xi-derivatives.
/// Binary families use the margin form g(-y xi).
template <class Scalar>
Scalar obs_loss(Family family, Scalar y, Scalar xi) {
  if (family.is_binary()) return cumulant(family, -y * xi);
  return cumulant(family, xi) - y * xi;
}

template <class Scalar>
Scalar obs_loss_grad(Family family, Scalar y, Scalar xi) {
  if (family.is_binary()) return -y * cumulant_deriv(family, -y * xi, 1);
  return cumulant_deriv(family, xi, 1) - y;
}

template <class Scalar>
Scalar obs_loss_curv(Family family, Scalar y, Scalar xi) {
  if (family.is_binary()) return cumulant_deriv(family, -y * xi, 2);
  return cumulant_deriv(family, xi, 2);
}

struct Dataset;

enum class ApproxMethod { bound, taylor };

/// Quadratic surrogate 1/2 (z - X theta)' W (z - X theta) of -l at a point.
struct Surrogate {
  Eigen::VectorXd weights;
  Eigen::VectorXd working_response;
};

/// -l(theta); throws DomainError naming the first offending row.
double neg_loglik(Family family, const Dataset& data, const Eigen::VectorXd& theta);

/// Gradient of l (not -l).
Eigen::VectorXd score(Family family, const Dataset& data, const Eigen::VectorXd& theta);

/// Hessian of -l: sum_i loss''(xi_i) x_i x_i'.
Eigen::MatrixXd hessian(Family family, const Dataset& data, const Eigen::VectorXd& theta);

/// Jaakkola-Jordan weight tanh(m/2)/(2m), with its m -> 0 limit 1/4.
double bound_weight(double margin);

/// IRLS weights and working response at theta0. `bound` is the logistic
/// majorizer; `taylor` is the second-order expansion for any family.
Surrogate irls_surrogate(Family family, const Dataset& data, const Eigen::VectorXd& theta0,
                         ApproxMethod method);

/// Value of the surrogate 1/2 (z - X theta)' W (z - X theta) at theta.
double surrogate_value(const Surrogate& s, const Dataset& data, const Eigen::VectorXd& theta);

}  // namespace lamp
