#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lamp/dataset.hpp"
#include "lamp/path.hpp"
#include "lamp/penalty.hpp"
#include "lamp/solver.hpp"

namespace lamp {

enum class CovKind { compound, ar1 };

/// Simulation design: X ~ N(0, Sigma), xi = alpha + x' beta.
struct SimDesign {
  std::string name = "custom";
  Eigen::Index n = 100;
  double alpha_true = 0.0;
  Eigen::VectorXd beta_true;
  CovKind cov_kind = CovKind::compound;
  double r = 0.5;
  Family family{FamilyKind::logistic};
  int reps = 100;
  std::uint64_t seed = 20240101;

  Eigen::Index p() const { return beta_true.size(); }
  Eigen::Index q() const;       // number of nonzero coefficients (a leading block)
  double zeta1() const;         // min |nonzero beta|
  double zeta2() const;         // max |nonzero beta|
  Eigen::MatrixXd covariance() const;
  Eigen::VectorXd theta_true() const;
  void validate() const;

  // Logistic, n = 200, p = 1000, compound 0.5, beta = (1.5, 1, -0.7, 0...).
  static SimDesign logistic_highdim();
  // Logistic, n = 200, p = 8, AR(1) 0.5, alpha = -3.
  static SimDesign logistic_ar1();
  // Poisson, n = 250, p = 15, compound 0.5, alpha = -1.
  static SimDesign poisson_design();
  // Probit, n = 250, p = 11, compound 0.5, alpha = -2.
  static SimDesign probit_design();
  // "highdim", "ar1", "poisson", "probit"
  static SimDesign preset(const std::string& name);
};

/// One competitor in a simulation. `oracle` returns the true coefficients.
struct PenaltyConfig {
  std::string label;
  bool oracle = false;
  // lambda0 chosen per replication by hybrid_select over the default ladder
  bool hybrid = false;
  PenaltySpec spec;  // lambda is filled in along the path

  // lasso | scad:a | mcp:gamma | sigmoid:lambda0[:rho] | poisson:lambda0 |
  // probit:lambda0[:alpha1] | lamp:<family>:lambda0[:alpha1] | oracle
  // For the LAMP kinds lambda0 may be the word "hybrid".
  static PenaltyConfig parse(const std::string& text);
  static std::vector<PenaltyConfig> parse_list(const std::string& text);
};

struct ReplicationMetrics {
  int tp = 0;
  int fp = 0;
  bool cf = false;
  bool of = false;
  bool uf = false;
  double l1 = 0.0;
  double l2 = 0.0;
  double model_error = 0.0;
  std::optional<double> me_ratio;  // ME(selected) / ME(full MLE)
  double lambda = 0.0;
  bool failed = false;
  std::string error;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

struct SimRow {
  std::string label;
  MeanSe tp, fp, cf, of, uf, l1, l2;
  double l1_median = 0.0;
  double l2_median = 0.0;
  double mrme = std::numeric_limits<double>::quiet_NaN();
  int mrme_used = 0;
  int mrme_excluded = 0;
  int reps_completed = 0;
  int failures = 0;
  std::vector<ReplicationMetrics> replications;
};

struct SimReport {
  std::string design;
  std::string selection;
  int reps_completed = 0;
  std::vector<SimRow> rows;

  const SimRow& row(const std::string& label) const;
};

struct SimOptions {
  Criterion selection = Criterion::bic();
  int n_lambda = 100;
  std::optional<double> ratio;
  SolverConfig solver;
  std::optional<Eigen::Index> max_df;
  bool compute_mrme = true;
  int threads = 1;
  int cv_seed_offset = 0;
};

/// Rows are i.i.d. N(0, Sigma) via the Cholesky factor of Sigma; the stream is
/// a function of (seed, rep_index) only.
Eigen::MatrixXd gen_covariates(const SimDesign& design, int rep_index);

/// Response for the design's family given covariates (without intercept).
Eigen::VectorXd gen_response(const SimDesign& design, const Eigen::MatrixXd& X, int rep_index);

/// Full replication dataset (intercept prepended).
Dataset gen_dataset(const SimDesign& design, int rep_index);

/// Selection and estimation metrics for an original-scale theta_hat.
ReplicationMetrics evaluate(const Eigen::VectorXd& theta_hat, const SimDesign& design);

/// (theta_hat - theta0)' S (theta_hat - theta0), S = blockdiag(1, Sigma).
double model_error(const Eigen::VectorXd& theta_hat, const SimDesign& design);

/// Median of the ratios.
double mrme(std::vector<double> ratios);

MeanSe mean_se(const std::vector<double>& values);

/// Type-7 quantile of unsorted data.
double quantile(std::vector<double> values, double prob);

SimReport run_table(const SimDesign& design, const std::vector<PenaltyConfig>& configs, const SimOptions& opts);

struct BoxStats {
  double min = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, max = 0.0;
  static BoxStats of(const std::vector<double>& values);
};

struct StabilityOptions {
  double perturb_sd = 0.0;
  int cv_repeats = 100;
  int folds = 10;
  int n_lambda = 100;
  std::optional<double> ratio;
  SolverConfig solver;
  std::optional<Eigen::Index> max_df;
  bool vary_fold_seed = true;
  int threads = 1;
};

struct StabilityRow {
  std::string label;
  std::vector<double> lambda_sd;  // per replication
  std::vector<double> coef_sd;    // per replication, mean over coefficients
  BoxStats lambda_box;
  BoxStats coef_box;
  int failures = 0;
};

struct StabilityReport {
  std::string design;
  double perturb_sd = 0.0;
  std::vector<StabilityRow> rows;
  const StabilityRow& row(const std::string& label) const;
};

/// Data perturbation applied to the covariates of a replication (no-op for sd = 0).
void perturb_covariates(Dataset& data, double sd, std::uint64_t seed, int rep_index);

StabilityReport stability_experiment(const SimDesign& design, const std::vector<PenaltyConfig>& configs,
                                     const StabilityOptions& opts);

struct PathTrace {
  std::string label;
  std::vector<double> lambdas;
  Eigen::MatrixXd coefficients;  // one row per lambda, original scale, intercept first
  std::size_t bic_index = 0;
  std::size_t cv_index = 0;
  double max_adjacent_jump = 0.0;
};

/// Largest change of any penalized coefficient between adjacent lambdas.
double max_adjacent_jump(const Eigen::MatrixXd& coefficients);

std::vector<PathTrace> path_smoothness_export(const SimDesign& design, const std::vector<PenaltyConfig>& configs,
                                              int rep_index = 0, int n_lambda = 100, int folds = 10,
                                              const SolverConfig& solver = {});

/// Seed for an independent stream derived from (seed, a, b).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

}  // namespace lamp
