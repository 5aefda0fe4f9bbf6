#include "lamp/penalty.hpp"

#include <sstream>

namespace lamp {

PenaltySpec PenaltySpec::lasso(double lambda) {
  PenaltySpec s;
  s.kind = PenaltyKind::lasso;
  s.lambda = lambda;
  return s;
}

PenaltySpec PenaltySpec::scad(double lambda, double a) {
  PenaltySpec s;
  s.kind = PenaltyKind::scad;
  s.lambda = lambda;
  s.a = a;
  return s;
}

PenaltySpec PenaltySpec::mcp(double lambda, double gamma) {
  PenaltySpec s;
  s.kind = PenaltyKind::mcp;
  s.lambda = lambda;
  s.gamma = gamma;
  return s;
}

PenaltySpec PenaltySpec::lamp(Family generator, double lambda, double lambda0, double alpha1) {
  PenaltySpec s;
  s.kind = PenaltyKind::lamp;
  s.generator = generator;
  s.lambda = lambda;
  s.lambda0 = lambda0;
  s.alpha1 = alpha1;
  return s;
}

PenaltySpec PenaltySpec::lamp(Family generator, double lambda, double lambda0) {
  return lamp(generator, lambda, lambda0, generator.default_alpha1());
}

PenaltySpec PenaltySpec::sigmoid(double lambda, double lambda0, double rho) {
  return lamp(Family(FamilyKind::logistic), lambda, lambda0, std::log(rho));
}

bool PenaltySpec::is_convex() const {
  return max_concavity(*this) == 0.0;
}

void PenaltySpec::validate() const {
  std::vector<std::string> problems;
  if (kind == PenaltyKind::lasso) {
    if (!(lambda >= 0.0)) problems.emplace_back("lambda must be >= 0");
  } else if (!(lambda > 0.0)) {
    problems.emplace_back("lambda must be > 0");
  }
  switch (kind) {
    case PenaltyKind::lamp:
      if (!(lambda0 > 0.0)) problems.emplace_back("lambda0 must be > 0");
      if (!(alpha1 <= 0.0)) problems.emplace_back("alpha1 must be <= 0");
      if ((generator.negative_domain() || generator.kind() == FamilyKind::gaussian) && !(alpha1 < 0.0))
        problems.emplace_back(std::string("alpha1 must be < 0 for the ") +
                              std::string(generator.name()) + " generator");
      break;
    case PenaltyKind::scad:
      if (!(a > 2.0)) problems.emplace_back("SCAD a must be > 2");
      break;
    case PenaltyKind::mcp:
      if (!(gamma > 1.0)) problems.emplace_back("MCP gamma must be > 1");
      break;
    case PenaltyKind::lasso: break;
  }
  if (!problems.empty()) {
    std::string msg = "invalid penalty:";
    for (const auto& p : problems) msg += " " + p + ";";
    throw ContractError(msg);
  }
}

std::string PenaltySpec::label() const {
  std::ostringstream os;
  switch (kind) {
    case PenaltyKind::lasso: os << "lasso"; break;
    case PenaltyKind::scad: os << "scad(" << a << ")"; break;
    case PenaltyKind::mcp: os << "mcp(" << gamma << ")"; break;
    case PenaltyKind::lamp:
      if (generator.kind() == FamilyKind::logistic)
        os << "sigmoid(" << lambda0 << ")";
      else
        os << "lamp-" << generator.name() << "(" << lambda0 << ")";
      break;
  }
  return os.str();
}

double max_concavity(const PenaltySpec& s) {
  switch (s.kind) {
    case PenaltyKind::lasso: return 0.0;
    case PenaltyKind::scad: return 1.0 / (s.a - 1.0);
    case PenaltyKind::mcp: return 1.0 / s.gamma;
    case PenaltyKind::lamp: {
      const double c = s.lambda0 * cumulant_deriv(s.generator, s.alpha1, 2) /
                       cumulant_deriv(s.generator, s.alpha1, 1);
      return c > 0.0 ? c : 0.0;
    }
  }
  return 0.0;
}

double lasso_limit_check(const PenaltySpec& s, double beta, double t) {
  detail::require_nonneg(beta);
  if (beta == 0.0) return 1.0;
  return penalty_value(s.with_lambda0(s.lambda0 * t), beta) / (s.lambda * beta);
}

std::vector<PenaltyCurvePoint> penalty_curve(const PenaltySpec& s, double beta_max, int points) {
  if (points < 2) throw ContractError("penalty_curve needs at least two points");
  if (!(beta_max > 0.0)) throw ContractError("penalty_curve needs beta_max > 0");
  std::vector<PenaltyCurvePoint> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double b = beta_max * k / (points - 1);
    out.push_back({b, penalty_value(s, b), penalty_deriv(s, b)});
  }
  return out;
}

}  // namespace lamp
