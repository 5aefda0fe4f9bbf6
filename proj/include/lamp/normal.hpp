#pragma once

#include <cmath>
#include <numbers>

// Standard normal helpers that stay accurate far into the tails. The probit
// family needs log Phi and the inverse Mills ratio at |x| where the naive
// formulas underflow or cancel.
namespace lamp::normal {

template <class Scalar>
Scalar pdf(Scalar x) {
  using std::exp;
  return exp(Scalar(-0.5) * x * x) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

template <class Scalar>
Scalar cdf(Scalar x) {
  using std::erfc;
  return Scalar(0.5) * erfc(-x / std::numbers::sqrt2_v<Scalar>);
}

namespace detail {

// Asymptotic series S(x) with Phi(x) = pdf(x) * S(x) / |x| for x << 0:
// S = 1 - 1/x^2 + 3/x^4 - 15/x^6 + ...
template <class Scalar>
Scalar tail_series(Scalar x) {
  const Scalar x2 = x * x;
  Scalar term = 1;
  Scalar sum = 1;
  for (int k = 1; k <= 12; ++k) {
    term *= -Scalar(2 * k - 1) / x2;
    sum += term;
  }
  return sum;
}

// 1 - S(x) without forming S first, used where S is close to one.
template <class Scalar>
Scalar one_minus_tail_series(Scalar x) {
  const Scalar x2 = x * x;
  Scalar term = 1;
  Scalar sum = 0;
  for (int k = 1; k <= 12; ++k) {
    term *= -Scalar(2 * k - 1) / x2;
    sum -= term;
  }
  return sum;
}

inline constexpr double kTailCut = 20.0;

}  // namespace detail

// log Phi(x)
template <class Scalar>
Scalar log_cdf(Scalar x) {
  using std::erfc;
  using std::log;
  using std::log1p;
  if (x > 0) return log1p(-cdf(-x));
  if (x > -Scalar(detail::kTailCut)) return log(cdf(x));
  return Scalar(-0.5) * x * x - Scalar(0.5) * log(Scalar(2) * std::numbers::pi_v<Scalar>) -
         log(-x) + log(detail::tail_series(x));
}

// pdf(x) / Phi(-x), the hazard of the standard normal.
template <class Scalar>
Scalar mills_hazard(Scalar x) {
  if (x < Scalar(detail::kTailCut)) return pdf(x) / cdf(-x);
  return x / detail::tail_series(-x);
}

// mills_hazard(x) - x, computed without cancellation for large x.
template <class Scalar>
Scalar mills_hazard_excess(Scalar x) {
  if (x < Scalar(detail::kTailCut)) return mills_hazard(x) - x;
  const Scalar s = detail::tail_series(-x);
  return x * detail::one_minus_tail_series(-x) / s;
}

}  // namespace lamp::normal
