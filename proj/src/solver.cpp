#include "lamp/solver.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include "lamp/normal.hpp"

namespace lamp {

double violation(double score_j, double theta_j, Eigen::Index j, Eigen::Index n, const PenaltySpec& spec) {
  if (j == 0) return std::abs(score_j);
  const double nn = static_cast<double>(n);
  if (theta_j == 0.0) {
    const double nl = nn * spec.lambda;
    return std::max({0.0, -nl - score_j, -nl + score_j});
  }
  const double sgn = theta_j > 0.0 ? 1.0 : -1.0;
  return std::abs(score_j - nn * sgn * penalty_deriv(spec, std::abs(theta_j)));
}

Eigen::VectorXd violations(const Dataset& data, Family family, const PenaltySpec& spec,
                           const Eigen::VectorXd& theta) {
  const Eigen::VectorXd F = score(family, data, theta);
  Eigen::VectorXd out(F.size());
  for (Eigen::Index j = 0; j < F.size(); ++j) out(j) = violation(F(j), theta(j), j, data.n(), spec);
  return out;
}

double coordinate_update(double z, double v, double r, bool is_intercept) {
  if (!(v > 0.0))
    throw NumericalError("non-positive coordinate curvature v = " + std::to_string(v));
  if (is_intercept) return z / v;
  const double shrunk = std::abs(z) - r;
  if (shrunk <= 0.0) return 0.0;
  return (z > 0.0 ? shrunk : -shrunk) / v;
}

double penalized_objective(const Dataset& data, Family family, const PenaltySpec& spec,
                           const Eigen::VectorXd& theta) {
  double pen = 0.0;
  for (Eigen::Index j = 1; j < theta.size(); ++j) pen += penalty_value(spec, std::abs(theta(j)));
  return neg_loglik(family, data, theta) + static_cast<double>(data.n()) * pen;
}

double null_intercept(const Dataset& data, Family family) {
  const double n = static_cast<double>(data.n());
  if (family.is_binary()) {
    const double k = static_cast<double>((data.y.array() > 0.0).count());
    if (k == 0.0 || k == n) throw DataError("degenerate response: only one class present");
    const double q = k / n;
    if (family.kind() == FamilyKind::logistic) return std::log(q / (1.0 - q));
    // probit: solve Phi(a) = q by bisection
    double lo = -40.0, hi = 40.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (normal::cdf(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  const double ybar = data.y.mean();
  switch (family.kind()) {
    case FamilyKind::gaussian: return ybar;
    case FamilyKind::poisson:
      if (!(ybar > 0.0)) throw DataError("degenerate response: all counts are zero");
      return std::log(ybar);
    case FamilyKind::gamma: return -1.0 / ybar;
    case FamilyKind::inverse_gaussian: return -1.0 / (2.0 * ybar * ybar);
    default: break;
  }
  return 0.0;
}

namespace {

Eigen::VectorXd null_theta(const Dataset& data, Family family) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(data.X.cols());
  // On a non-centered design the intercept-only MLE still solves the same
  // one-dimensional equation because the other coefficients are zero.
  theta(0) = null_intercept(data, family);
  return theta;
}

// Sum of per-observation losses at xi, or +inf when any xi leaves the domain.
double loss_sum(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& xi) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    if (!family.in_domain(xi(i))) return std::numeric_limits<double>::infinity();
    total += obs_loss(family, y(i), xi(i));
  }
  return total;
}

class CoordinateDescent {
 public:
  CoordinateDescent(const Dataset& data, Family family, const PenaltySpec& spec, ApproxMethod method,
                    Eigen::VectorXd theta)
      : data_(data),
        family_(family),
        spec_(spec),
        method_(method),
        n_(static_cast<double>(data.n())),
        theta_(std::move(theta)),
        xi_(data.X * theta_),
        u_(data.n()),
        w_(data.n()) {
    // taylor steps are Newton steps and may overshoot; bound steps are MM
    // steps and never increase the objective.
    safeguard_ = method_ == ApproxMethod::taylor;
    refresh();
  }

  const Eigen::VectorXd& theta() const { return theta_; }

  double score_at(Eigen::Index j) const { return data_.X.col(j).dot(u_); }
  Eigen::VectorXd full_score() const { return data_.X.transpose() * u_; }

  double viol_at(Eigen::Index j, double Fj) const {
    return violation(Fj, theta_(j), j, data_.n(), spec_);
  }

  // One surrogate-minimizing step on coordinate j. Returns true when theta moved.
  bool step(Eigen::Index j, double Fj) {
    const auto col = data_.X.col(j);
    const double v = col.cwiseAbs2().dot(w_) / n_;
    // (1/n) X_j' W (z - X theta) equals F_j / n by tangency of the surrogate.
    const double z = Fj / n_ + v * theta_(j);
    const double r = j == 0 ? 0.0 : penalty_deriv(spec_, std::abs(theta_(j)));
    const double target = coordinate_update(z, v, r, j == 0);
    double delta = target - theta_(j);
    if (delta == 0.0) return false;

    if (safeguard_) {
      const double base = loss_ + penalty_term(j, theta_(j));
      int halvings = 0;
      for (;; ++halvings) {
        const Eigen::VectorXd trial = xi_ + delta * col;
        const double cand = loss_sum(family_, data_.y, trial) + penalty_term(j, theta_(j) + delta);
        if (cand <= base + 1e-12 * (1.0 + std::abs(base))) break;
        if (halvings >= 60) return false;
        delta *= 0.5;
      }
    }
    theta_(j) += delta;
    xi_ += delta * col;
    refresh();
    return true;
  }

 private:
  double penalty_term(Eigen::Index j, double t) const {
    return j == 0 ? 0.0 : n_ * penalty_value(spec_, std::abs(t));
  }

  void refresh() {
    const auto& y = data_.y;
    loss_ = 0.0;
    for (Eigen::Index i = 0; i < xi_.size(); ++i) {
      const double xi = xi_(i);
      if (!family_.in_domain(xi))
        throw DomainError("row " + std::to_string(i) + ": natural parameter left the domain",
                          static_cast<long>(i));
      u_(i) = -obs_loss_grad(family_, y(i), xi);
      w_(i) = method_ == ApproxMethod::bound ? bound_weight(y(i) * xi) : obs_loss_curv(family_, y(i), xi);
      if (safeguard_) loss_ += obs_loss(family_, y(i), xi);
    }
  }

  const Dataset& data_;
  Family family_;
  const PenaltySpec& spec_;
  ApproxMethod method_;
  double n_;
  bool safeguard_ = false;
  Eigen::VectorXd theta_;
  Eigen::VectorXd xi_;
  Eigen::VectorXd u_;  // -d loss / d xi
  Eigen::VectorXd w_;  // surrogate weights
  double loss_ = 0.0;
};

struct LoopOutcome {
  long steps = 0;
  double final_viol = 0.0;
  bool converged = false;
};

LoopOutcome run_greedy(CoordinateDescent& cd, double tau, long max_iter, const SolverConfig& cfg) {
  LoopOutcome out;
  for (;;) {
    const Eigen::VectorXd F = cd.full_score();
    Eigen::Index jstar = 0;
    double worst = -1.0;
    for (Eigen::Index j = 0; j < F.size(); ++j) {
      const double v = cd.viol_at(j, F(j));
      if (v > worst) {
        worst = v;
        jstar = j;
      }
    }
    out.final_viol = worst;
    if (worst <= tau) {
      out.converged = true;
      return out;
    }
    if (out.steps >= max_iter) return out;
    cd.step(jstar, F(jstar));
    ++out.steps;
    if (cfg.on_step) cfg.on_step(out.steps, cd.theta());
  }
}

LoopOutcome run_active_set(CoordinateDescent& cd, double tau, long max_iter, const SolverConfig& cfg) {
  LoopOutcome out;
  const auto dim = cd.theta().size();
  std::vector<char> in_set(static_cast<std::size_t>(dim), 0);
  std::vector<Eigen::Index> active{0};
  in_set[0] = 1;
  for (Eigen::Index j = 1; j < dim; ++j)
    if (cd.theta()(j) != 0.0) {
      active.push_back(j);
      in_set[static_cast<std::size_t>(j)] = 1;
    }

  for (;;) {
    // Cycle the active set until every member satisfies the tolerance.
    for (;;) {
      double sweep_worst = 0.0;
      for (const auto j : active) {
        const double Fj = cd.score_at(j);
        const double v = cd.viol_at(j, Fj);
        sweep_worst = std::max(sweep_worst, v);
        if (v <= tau) continue;
        if (out.steps >= max_iter) break;
        cd.step(j, Fj);
        ++out.steps;
        if (cfg.on_step) cfg.on_step(out.steps, cd.theta());
      }
      if (sweep_worst <= tau || out.steps >= max_iter) break;
    }
    // Full check; admit every violator.
    const Eigen::VectorXd F = cd.full_score();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double v = cd.viol_at(j, F(j));
      worst = std::max(worst, v);
      if (v > tau && !in_set[static_cast<std::size_t>(j)]) {
        in_set[static_cast<std::size_t>(j)] = 1;
        active.push_back(j);
      }
    }
    out.final_viol = worst;
    if (worst <= tau) {
      out.converged = true;
      return out;
    }
    if (out.steps >= max_iter) return out;
  }
}

}  // namespace

Eigen::VectorXd fit_mle(const Dataset& data, Family family, int max_newton) {
  if (data.n() <= data.p() + 1)
    throw ContractError("MLE requires n > p + 1 (n = " + std::to_string(data.n()) +
                        ", p = " + std::to_string(data.p()) + ")");
  Eigen::VectorXd theta = null_theta(data, family);
  double obj = neg_loglik(family, data, theta);
  for (int it = 0; it < max_newton; ++it) {
    const Eigen::VectorXd F = score(family, data, theta);
    const Eigen::MatrixXd H = hessian(family, data, theta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
      throw NumericalError("MLE: Hessian is not positive definite");
    Eigen::VectorXd step = ldlt.solve(F);
    if (!step.allFinite()) throw NumericalError("MLE: non-finite Newton step");
    // Stop on the Newton decrement.
    if (F.dot(step) < 1e-20 * (1.0 + std::abs(obj))) {
      // A binary fit with every margin positive can always be scaled up: no finite MLE.
      if (family.is_binary() && (data.y.array() * (data.X * theta).array()).minCoeff() > 0.0)
        throw NumericalError("MLE diverged (complete separation)");
      return theta;
    }
    double t = 1.0;
    for (int h = 0;; ++h) {
      const Eigen::VectorXd cand = theta + t * step;
      const Eigen::VectorXd xi = data.X * cand;
      const double c = loss_sum(family, data.y, xi);
      if (c <= obj) {
        theta = cand;
        obj = c;
        break;
      }
      if (h >= 60) return theta;
      t *= 0.5;
    }
    if (!theta.allFinite() || theta.cwiseAbs().maxCoeff() > 1e6)
      throw NumericalError("MLE diverged (separation or non-existence)");
  }
  throw NumericalError("MLE did not converge in " + std::to_string(max_newton) + " Newton steps");
}

FitResult fit(const Dataset& data, Family family, const PenaltySpec& spec, const SolverConfig& cfg) {
  validate(data, family);
  spec.validate();
  const ApproxMethod method = cfg.resolved_approx(family);
  if (method == ApproxMethod::bound && family.kind() != FamilyKind::logistic)
    throw ContractError("the bound surrogate is only available for the logistic family");
  const double tau = cfg.resolved_tau(data.n());
  const long max_iter = cfg.resolved_max_iter(data.p());
  if (!(tau > 0.0)) throw ContractError("tau must be > 0");
  if (max_iter < 1) throw ContractError("max_iter must be >= 1");

  Dataset standardized;
  Standardization record = Standardization::identity(data.p());
  if (cfg.standardize) std::tie(standardized, record) = standardize(data);
  const Dataset& work = cfg.standardize ? standardized : data;

  Eigen::VectorXd start;
  switch (cfg.init) {
    case InitKind::zeros: start = null_theta(work, family); break;
    case InitKind::warm:
      if (cfg.warm_theta.size() != data.X.cols())
        throw ContractError("warm start has length " + std::to_string(cfg.warm_theta.size()) +
                            ", expected " + std::to_string(data.X.cols()));
      start = restandardize(cfg.warm_theta, record);
      break;
    case InitKind::mle: start = fit_mle(work, family); break;
  }

  CoordinateDescent cd(work, family, spec, method, std::move(start));
  const LoopOutcome loop = cfg.sweep == SweepStrategy::greedy ? run_greedy(cd, tau, max_iter, cfg)
                                                              : run_active_set(cd, tau, max_iter, cfg);

  FitResult res;
  res.theta = destandardize(cd.theta(), record);
  res.iterations = loop.steps;
  res.final_viol = loop.final_viol;
  res.tau = tau;
  res.converged = loop.converged;
  for (Eigen::Index j = 1; j < res.theta.size(); ++j)
    if (cd.theta()(j) != 0.0) res.active_set.push_back(j);
  res.objective = penalized_objective(work, family, spec, cd.theta());
  return res;
}

}  // namespace lamp
