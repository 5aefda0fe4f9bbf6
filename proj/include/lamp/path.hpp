#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lamp/dataset.hpp"
#include "lamp/penalty.hpp"
#include "lamp/solver.hpp"

namespace lamp {

enum class CriterionKind { aic, bic, ebic, cv };

/// Model-selection rule. `eta` is the EBIC exponent, `folds` the CV fold count.
struct Criterion {
  CriterionKind kind = CriterionKind::bic;
  double eta = 1.0;
  int folds = 10;

  static Criterion aic() { return {CriterionKind::aic, 0.0, 0}; }
  static Criterion bic() { return {CriterionKind::bic, 0.0, 0}; }
  static Criterion ebic(double eta = 1.0) { return {CriterionKind::ebic, eta, 0}; }
  static Criterion cv(int folds = 10) { return {CriterionKind::cv, 0.0, folds}; }
  // "aic", "bic", "ebic", "ebic:0.5", "cv", "cv:5"
  static Criterion parse(const std::string& text);
  std::string label() const;
};

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
  double ebic = 0.0;
};

struct SolutionPath {
  std::vector<double> lambdas;
  std::vector<FitResult> fits;
  std::vector<Eigen::Index> df;
  std::vector<InformationCriteria> criteria;
  std::vector<char> convex_flag;
  std::vector<double> min_eig;
  // Per-lambda failure message; empty when the fit succeeded.
  std::vector<std::string> errors;
  double eta = 1.0;  // EBIC exponent used for `criteria`

  std::size_t size() const { return lambdas.size(); }
  bool ok(std::size_t k) const { return errors[k].empty(); }
};

struct PathOptions {
  bool diagnostics = true;       // compute min_eig / convex_flag per lambda
  double eta = 1.0;              // EBIC exponent stored in `criteria`
  std::optional<Eigen::Index> max_df;  // stop the path once df exceeds this
};

struct ConvexityDiagnostic {
  double min_eig = 0.0;
  bool convex = false;
};

struct CvCurve {
  std::vector<double> lambdas;
  std::vector<double> mean;
  std::vector<double> se;
  std::size_t best = 0;
  double best_lambda() const { return lambdas[best]; }
};

struct TuneReport {
  double chosen_lambda0 = 0.0;
  double chosen_lambda = 0.0;
  Criterion criterion_used;
  std::optional<CvCurve> cv_curve;
  bool stable = false;
  FitResult fit;
  // Per visited lambda0: (lambda0, selected lambda, min_eig at the selection).
  struct Visit {
    double lambda0;
    double lambda;
    double min_eig;
    bool stable;
  };
  std::vector<Visit> visits;
};

/// lambda_max = max_{j>=1} |F_j(null)| / n on the standardized design.
double lambda_max(const Dataset& data, Family family);

/// Log-spaced decreasing grid from lambda_max to ratio * lambda_max.
std::vector<double> lambda_grid(const Dataset& data, Family family, int n_lambda, double ratio);

/// Default ratio: 0.01 when n > p, 0.05 otherwise.
double default_ratio(const Dataset& data);

/// Warm-started fits along a decreasing grid. Per-lambda failures are
/// recorded in `errors` and the next lambda restarts from the last success.
SolutionPath fit_path(const Dataset& data, Family family, const PenaltySpec& spec_template,
                      const std::vector<double>& grid, const SolverConfig& cfg = {},
                      const PathOptions& opts = {});

/// aic = 2 nll + 2 df, bic = 2 nll + df log n, ebic = bic + 2 eta df log p.
double criterion_value(const FitResult& fit, const Dataset& data, Family family, Criterion c);
InformationCriteria information_criteria(const FitResult& fit, const Dataset& data, Family family,
                                         double eta);

/// Index of the selected lambda for aic/bic/ebic (first minimum, i.e. the
/// largest lambda among ties). Failed entries are skipped.
std::size_t select_index(const SolutionPath& path, Criterion c);

/// Deterministic fold labels in [0, k): a seeded permutation dealt round-robin.
std::vector<int> fold_assignment(Eigen::Index n, int k, std::uint64_t seed);

/// k-fold CV of held-out mean negative log-likelihood per observation.
CvCurve cross_validate(const Dataset& data, Family family, const PenaltySpec& spec_template,
                       const std::vector<double>& grid, int k, std::uint64_t seed,
                       const SolverConfig& cfg = {}, std::optional<Eigen::Index> max_df = {});

/// Smallest eigenvalue of (1/n) Hessian(-l) restricted to {0} u active set,
/// plus diag(p''(|theta_j|)) on the active coordinates. Evaluated on the
/// standardized design.
ConvexityDiagnostic convexity_diagnostic(const FitResult& fit, const Dataset& data, Family family,
                                         const PenaltySpec& spec);

/// Same diagnostic for a working-scale theta on an already standardized design.
ConvexityDiagnostic convexity_diagnostic_working(const Eigen::VectorXd& theta, const Dataset& work,
                                                 Family family, const PenaltySpec& spec);

/// Default lambda0 ladder: 8 log-spaced values from the lambda0 whose maximum
/// concavity equals the largest coordinate curvature of -l/n at the null fit,
/// down to 1e-3 of it.
std::vector<double> default_lambda0_ladder(const Dataset& data, Family family, const PenaltySpec& spec_template,
                                           int count = 8);

struct HybridOptions {
  int n_lambda = 100;
  std::optional<double> ratio;
  std::uint64_t seed = 1;
  std::optional<Eigen::Index> max_df;
};

/// Walks the lambda0 ladder from largest to smallest, selecting lambda by the
/// criterion and stopping at the first selection inside the locally convex
/// region.
TuneReport hybrid_select(const Dataset& data, Family family, const PenaltySpec& spec_template,
                         const std::vector<double>& lambda0_ladder, Criterion criterion,
                         const SolverConfig& cfg = {}, const HybridOptions& opts = {});

}  // namespace lamp
