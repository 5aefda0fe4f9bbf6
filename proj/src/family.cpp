#include "lamp/family.hpp"

#include <sstream>

#include "lamp/dataset.hpp"

namespace lamp {

Family Family::from_name(std::string_view name) {
  if (name == "gaussian" || name == "linear") return Family(FamilyKind::gaussian);
  if (name == "logistic" || name == "binomial") return Family(FamilyKind::logistic);
  if (name == "poisson") return Family(FamilyKind::poisson);
  if (name == "gamma") return Family(FamilyKind::gamma);
  if (name == "inverse_gaussian") return Family(FamilyKind::inverse_gaussian);
  if (name == "probit") return Family(FamilyKind::probit);
  throw ContractError("unknown family '" + std::string(name) + "'");
}

std::string_view Family::name() const {
  switch (kind_) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::logistic: return "logistic";
    case FamilyKind::poisson: return "poisson";
    case FamilyKind::gamma: return "gamma";
    case FamilyKind::inverse_gaussian: return "inverse_gaussian";
    case FamilyKind::probit: return "probit";
  }
  return "unknown";
}

ResponseCoding Family::coding() const {
  switch (kind_) {
    case FamilyKind::logistic:
    case FamilyKind::probit: return ResponseCoding::plus_minus_one;
    case FamilyKind::poisson: return ResponseCoding::nonneg_count;
    case FamilyKind::gamma:
    case FamilyKind::inverse_gaussian: return ResponseCoding::positive_real;
    case FamilyKind::gaussian: return ResponseCoding::real;
  }
  return ResponseCoding::real;
}

double Family::default_alpha1() const {
  switch (kind_) {
    case FamilyKind::gaussian:
    case FamilyKind::gamma:
    case FamilyKind::inverse_gaussian: return -1.0;
    case FamilyKind::logistic:
    case FamilyKind::probit:
    case FamilyKind::poisson: return 0.0;
  }
  return 0.0;
}

namespace detail {
void throw_domain(Family family, double xi) {
  std::ostringstream os;
  os << family.name() << ": natural parameter " << xi << " is outside the domain";
  throw DomainError(os.str());
}
}  // namespace detail

namespace {

// Rewraps a scalar domain failure with the offending row.
template <class F>
auto per_row(Eigen::Index i, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw DomainError("row " + std::to_string(i) + ": " + e.what(), static_cast<long>(i));
  }
}

void check_shapes(const Dataset& data, const Eigen::VectorXd& theta) {
  if (theta.size() != data.X.cols())
    throw ContractError("coefficient vector has length " + std::to_string(theta.size()) +
                        ", expected " + std::to_string(data.X.cols()));
}

}  // namespace

double neg_loglik(Family family, const Dataset& data, const Eigen::VectorXd& theta) {
  check_shapes(data, theta);
  const Eigen::VectorXd xi = data.X * theta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    total += per_row(i, [&] { return obs_loss(family, data.y(i), xi(i)); });
  return total;
}

Eigen::VectorXd score(Family family, const Dataset& data, const Eigen::VectorXd& theta) {
  check_shapes(data, theta);
  const Eigen::VectorXd xi = data.X * theta;
  Eigen::VectorXd u(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    u(i) = -per_row(i, [&] { return obs_loss_grad(family, data.y(i), xi(i)); });
  return data.X.transpose() * u;
}

Eigen::MatrixXd hessian(Family family, const Dataset& data, const Eigen::VectorXd& theta) {
  check_shapes(data, theta);
  const Eigen::VectorXd xi = data.X * theta;
  Eigen::VectorXd w(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i)
    w(i) = per_row(i, [&] { return obs_loss_curv(family, data.y(i), xi(i)); });
  Eigen::MatrixXd H = data.X.transpose() * w.asDiagonal() * data.X;
  return (H + H.transpose()) / 2.0;
}

double bound_weight(double margin) {
  if (std::abs(margin) < 1e-4) {
    const double m2 = margin * margin;
    return 0.25 - m2 / 48.0 + m2 * m2 / 480.0 - 17.0 * m2 * m2 * m2 / 80640.0;
  }
  return std::tanh(margin / 2.0) / (2.0 * margin);
}

Surrogate irls_surrogate(Family family, const Dataset& data, const Eigen::VectorXd& theta0,
                         ApproxMethod method) {
  check_shapes(data, theta0);
  if (method == ApproxMethod::bound && family.kind() != FamilyKind::logistic)
    throw ContractError("the bound surrogate is only defined for the logistic family");
  const Eigen::VectorXd xi = data.X * theta0;
  const auto n = xi.size();
  Surrogate s{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (method == ApproxMethod::bound) {
      const double w = bound_weight(xi(i) * data.y(i));
      s.weights(i) = w;
      s.working_response(i) = data.y(i) / (2.0 * w);
    } else {
      const double w = per_row(i, [&] { return obs_loss_curv(family, data.y(i), xi(i)); });
      const double grad = obs_loss_grad(family, data.y(i), xi(i));
      if (!(w > 0.0)) {
        if (grad != 0.0)
          throw NumericalError("row " + std::to_string(i) +
                               ": zero IRLS weight with nonzero residual");
        s.weights(i) = 0.0;
        s.working_response(i) = xi(i);
        continue;
      }
      s.weights(i) = w;
      s.working_response(i) = xi(i) - grad / w;
    }
  }
  return s;
}

double surrogate_value(const Surrogate& s, const Dataset& data, const Eigen::VectorXd& theta) {
  const Eigen::VectorXd r = s.working_response - data.X * theta;
  return 0.5 * r.dot(s.weights.asDiagonal() * r);
}

}  // namespace lamp
