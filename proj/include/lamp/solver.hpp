#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lamp/dataset.hpp"
#include "lamp/family.hpp"
#include "lamp/penalty.hpp"

namespace lamp {

enum class InitKind { zeros, warm, mle };

// greedy: pick the max-violation coordinate every step (the printed algorithm).
// active_set: cycle the current active set to convergence, then admit violators.
enum class SweepStrategy { greedy, active_set };

struct SolverConfig {
  std::optional<double> tau;             // default 1e-4 * n
  std::optional<long> max_iter;          // default 1000 * p coordinate steps
  std::optional<ApproxMethod> approx;    // default bound for logistic, taylor otherwise
  InitKind init = InitKind::zeros;
  Eigen::VectorXd warm_theta;            // original-scale start for InitKind::warm
  SweepStrategy sweep = SweepStrategy::greedy;
  bool standardize = true;
  // Observer called after every coordinate step with the working-scale theta.
  std::function<void(long step, const Eigen::VectorXd& theta)> on_step;

  double resolved_tau(Eigen::Index n) const { return tau.value_or(1e-4 * static_cast<double>(n)); }
  long resolved_max_iter(Eigen::Index p) const {
    return max_iter.value_or(1000L * std::max<long>(1, static_cast<long>(p)));
  }
  ApproxMethod resolved_approx(Family family) const {
    return approx.value_or(family.kind() == FamilyKind::logistic ? ApproxMethod::bound
                                                                  : ApproxMethod::taylor);
  }
};

struct FitResult {
  Eigen::VectorXd theta;  // original scale, intercept first
  long iterations = 0;    // coordinate steps taken
  double final_viol = 0.0;
  double tau = 0.0;
  bool converged = false;
  std::vector<Eigen::Index> active_set;  // j >= 1 with theta_j != 0
  double objective = 0.0;  // penalized objective on the working (standardized) scale

  Eigen::Index df() const { return static_cast<Eigen::Index>(active_set.size()); }
};

/// Optimality residual of coordinate j given the score component F_j.
double violation(double score_j, double theta_j, Eigen::Index j, Eigen::Index n, const PenaltySpec& spec);

/// All coordinate violations at theta, recomputed from scratch.
Eigen::VectorXd violations(const Dataset& data, Family family, const PenaltySpec& spec,
                           const Eigen::VectorXd& theta);

/// argmin_t (v/2) t^2 - z t + r |t| (r ignored for the intercept).
double coordinate_update(double z, double v, double r, bool is_intercept);

/// -l(theta) + n sum_{j>=1} p(|theta_j|)
double penalized_objective(const Dataset& data, Family family, const PenaltySpec& spec,
                           const Eigen::VectorXd& theta);

/// Intercept-only maximum likelihood estimate of the intercept.
double null_intercept(const Dataset& data, Family family);

/// Unpenalized MLE by damped Newton/IRLS. Requires n > p + 1.
Eigen::VectorXd fit_mle(const Dataset& data, Family family, int max_newton = 100);

/// Coordinate-descent fit of the penalized objective.
FitResult fit(const Dataset& data, Family family, const PenaltySpec& spec, const SolverConfig& cfg = {});

}  // namespace lamp
