#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lamp/errors.hpp"
#include "lamp/family.hpp"

namespace lamp {

enum class PenaltyKind { lamp, lasso, scad, mcp };

/// A penalty and its tuning parameters. Only the fields relevant to `kind`
/// are read: lambda0/alpha1/generator for LAMP, a for SCAD, gamma for MCP.
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::lasso;
  Family generator{FamilyKind::logistic};
  double lambda = 1.0;
  double lambda0 = 1.0;
  double alpha1 = 0.0;
  double a = 3.7;
  double gamma = 3.0;

  static PenaltySpec lasso(double lambda);
  static PenaltySpec scad(double lambda, double a);
  static PenaltySpec mcp(double lambda, double gamma);
  static PenaltySpec lamp(Family generator, double lambda, double lambda0, double alpha1);
  // LAMP(generator) with the family's default alpha1.
  static PenaltySpec lamp(Family generator, double lambda, double lambda0);
  // Logistic LAMP parameterised by rho = exp(alpha1).
  static PenaltySpec sigmoid(double lambda, double lambda0, double rho = 1.0);

  PenaltySpec with_lambda(double value) const {
    PenaltySpec s = *this;
    s.lambda = value;
    return s;
  }
  PenaltySpec with_lambda0(double value) const {
    PenaltySpec s = *this;
    s.lambda0 = value;
    return s;
  }

  double rho() const { return std::exp(alpha1); }
  bool is_convex() const;

  /// Throws ContractError describing every violated parameter range.
  void validate() const;
  std::string label() const;
};

namespace detail {
inline void require_nonneg(double beta) {
  if (!(beta >= 0.0)) throw ContractError("penalty evaluated at negative beta; pass |beta|");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// LAMP, generic form: p(b) = lambda^2 / (g'(a1) lambda0) [g(a1) - g(a1 - (lambda0/lambda) b)]
// ---------------------------------------------------------------------------

template <class Scalar>
Scalar lamp_generic_value(const PenaltySpec& s, Scalar beta) {
  detail::require_nonneg(static_cast<double>(beta));
  const Family g = s.generator;
  const Scalar a1 = Scalar(s.alpha1);
  const Scalar c = Scalar(s.lambda0 / s.lambda);
  return Scalar(s.lambda * s.lambda) / (cumulant_deriv(g, a1, 1) * Scalar(s.lambda0)) *
         (cumulant(g, a1) - cumulant(g, a1 - c * beta));
}

template <class Scalar>
Scalar lamp_generic_deriv(const PenaltySpec& s, Scalar beta) {
  detail::require_nonneg(static_cast<double>(beta));
  const Family g = s.generator;
  const Scalar a1 = Scalar(s.alpha1);
  const Scalar c = Scalar(s.lambda0 / s.lambda);
  return Scalar(s.lambda) * cumulant_deriv(g, a1 - c * beta, 1) / cumulant_deriv(g, a1, 1);
}

template <class Scalar>
Scalar lamp_generic_second_deriv(const PenaltySpec& s, Scalar beta) {
  detail::require_nonneg(static_cast<double>(beta));
  const Family g = s.generator;
  const Scalar a1 = Scalar(s.alpha1);
  const Scalar c = Scalar(s.lambda0 / s.lambda);
  return -Scalar(s.lambda0) * cumulant_deriv(g, a1 - c * beta, 2) / cumulant_deriv(g, a1, 1);
}

// ---------------------------------------------------------------------------
// LAMP, closed forms for the six generators (linear = elastic net, sigmoid,
// Poisson, gamma, inverse Gaussian, probit).
// ---------------------------------------------------------------------------

template <class Scalar>
Scalar lamp_closed_value(const PenaltySpec& s, Scalar beta) {
  using std::exp;
  using std::expm1;
  using std::log1p;
  using std::sqrt;
  detail::require_nonneg(static_cast<double>(beta));
  const Scalar lam = Scalar(s.lambda);
  const Scalar lam0 = Scalar(s.lambda0);
  const Scalar a1 = Scalar(s.alpha1);
  const Scalar cb = lam0 / lam * beta;
  switch (s.generator.kind()) {
    case FamilyKind::gaussian: return lam * beta - lam0 * beta * beta / (Scalar(2) * a1);
    case FamilyKind::logistic: {
      const Scalar rho = exp(a1);
      // log[(1 + rho) / (1 + rho e^{-cb})] = log1p(-rho expm1(-cb) / (1 + rho e^{-cb}))
      const Scalar inner = -rho * expm1(-cb) / (Scalar(1) + rho * exp(-cb));
      return lam * lam * (Scalar(1) + rho) / (lam0 * rho) * log1p(inner);
    }
    case FamilyKind::poisson: return -lam * lam / lam0 * expm1(-cb);
    case FamilyKind::gamma: return -lam * lam * a1 / lam0 * log1p(cb / (-a1));
    case FamilyKind::inverse_gaussian: {
      const Scalar r = sqrt(-a1);
      return Scalar(2) * lam * lam / lam0 * r * cb / (sqrt(cb - a1) + r);
    }
    case FamilyKind::probit:
      return lam * lam * normal::cdf(-a1) / (lam0 * normal::pdf(a1)) *
             (normal::log_cdf(-a1 + cb) - normal::log_cdf(-a1));
  }
  return Scalar(0);
}

template <class Scalar>
Scalar lamp_closed_deriv(const PenaltySpec& s, Scalar beta) {
  using std::exp;
  using std::sqrt;
  detail::require_nonneg(static_cast<double>(beta));
  const Scalar lam = Scalar(s.lambda);
  const Scalar lam0 = Scalar(s.lambda0);
  const Scalar a1 = Scalar(s.alpha1);
  const Scalar cb = lam0 / lam * beta;
  switch (s.generator.kind()) {
    case FamilyKind::gaussian: return lam - lam0 * beta / a1;
    case FamilyKind::logistic: {
      const Scalar rho = exp(a1);
      const Scalar e = exp(-cb);
      return lam * (Scalar(1) + rho) * e / (Scalar(1) + rho * e);
    }
    case FamilyKind::poisson: return lam * exp(-cb);
    case FamilyKind::gamma: return lam * (-a1) / (cb - a1);
    case FamilyKind::inverse_gaussian: return lam * sqrt(-a1 / (cb - a1));
    case FamilyKind::probit:
      return lam * normal::mills_hazard(a1 - cb) / normal::mills_hazard(a1);
  }
  return Scalar(0);
}

// ---------------------------------------------------------------------------
// Dispatch over all penalty kinds. Callers pass |beta|.
// ---------------------------------------------------------------------------

template <class Scalar>
Scalar penalty_value(const PenaltySpec& s, Scalar beta) {
  detail::require_nonneg(static_cast<double>(beta));
  const Scalar lam = Scalar(s.lambda);
  switch (s.kind) {
    case PenaltyKind::lamp: return lamp_closed_value(s, beta);
    case PenaltyKind::lasso: return lam * beta;
    case PenaltyKind::scad: {
      const Scalar a = Scalar(s.a);
      if (beta <= lam) return lam * beta;
      if (beta <= a * lam) return (Scalar(2) * a * lam * beta - beta * beta - lam * lam) / (Scalar(2) * (a - Scalar(1)));
      return lam * lam * (a + Scalar(1)) / Scalar(2);
    }
    case PenaltyKind::mcp: {
      const Scalar g = Scalar(s.gamma);
      if (beta <= g * lam) return lam * beta - beta * beta / (Scalar(2) * g);
      return g * lam * lam / Scalar(2);
    }
  }
  return Scalar(0);
}

template <class Scalar>
Scalar penalty_deriv(const PenaltySpec& s, Scalar beta) {
  detail::require_nonneg(static_cast<double>(beta));
  const Scalar lam = Scalar(s.lambda);
  switch (s.kind) {
    case PenaltyKind::lamp: return lamp_closed_deriv(s, beta);
    case PenaltyKind::lasso: return lam;
    case PenaltyKind::scad: {
      const Scalar a = Scalar(s.a);
      if (beta <= lam) return lam;
      if (beta <= a * lam) return (a * lam - beta) / (a - Scalar(1));
      return Scalar(0);
    }
    case PenaltyKind::mcp: {
      const Scalar g = Scalar(s.gamma);
      if (beta <= g * lam) return lam - beta / g;
      return Scalar(0);
    }
  }
  return Scalar(0);
}

/// p''(beta). SCAD and MCP are piecewise quadratic; evaluating exactly at a
/// breakpoint throws KinkError. At beta = 0 the right-hand value is returned.
template <class Scalar>
Scalar penalty_second_deriv(const PenaltySpec& s, Scalar beta) {
  detail::require_nonneg(static_cast<double>(beta));
  const Scalar lam = Scalar(s.lambda);
  switch (s.kind) {
    case PenaltyKind::lamp: return lamp_generic_second_deriv(s, beta);
    case PenaltyKind::lasso: return Scalar(0);
    case PenaltyKind::scad: {
      const Scalar a = Scalar(s.a);
      if (beta == lam || beta == a * lam) throw KinkError("SCAD second derivative at a kink");
      if (beta < lam || beta > a * lam) return Scalar(0);
      return Scalar(-1) / (a - Scalar(1));
    }
    case PenaltyKind::mcp: {
      const Scalar g = Scalar(s.gamma);
      if (beta == g * lam) throw KinkError("MCP second derivative at a kink");
      return beta < g * lam ? Scalar(-1) / g : Scalar(0);
    }
  }
  return Scalar(0);
}

/// sup over beta > 0 of -p''(beta), clipped at zero for convex penalties.
/// For LAMP this is lambda0 g''(a1)/g'(a1), which holds whenever g'' is
/// nondecreasing on (-inf, a1] (true for all six generators).
double max_concavity(const PenaltySpec& s);

/// value(spec with lambda0 scaled by t, beta) / (lambda beta); tends to 1 as
/// t -> 0. Defined as 1 at beta = 0.
double lasso_limit_check(const PenaltySpec& s, double beta, double t = 1e-6);

struct PenaltyCurvePoint {
  double beta;
  double value;
  double deriv;
};

/// Evenly spaced (beta, p, p') samples on [0, beta_max].
std::vector<PenaltyCurvePoint> penalty_curve(const PenaltySpec& s, double beta_max, int points);

}  // namespace lamp
