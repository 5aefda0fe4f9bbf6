#include "lamp/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace lamp {

Criterion Criterion::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "aic" && arg.empty()) return aic();
    if (head == "bic" && arg.empty()) return bic();
    if (head == "ebic") return ebic(arg.empty() ? 1.0 : std::stod(arg));
    if (head == "cv") {
      const int k = arg.empty() ? 10 : std::stoi(arg);
      if (k < 2) throw ContractError("cv needs at least 2 folds");
      return cv(k);
    }
  } catch (const std::logic_error&) {
    throw ContractError("cannot parse criterion '" + text + "'");
  }
  throw ContractError("unknown criterion '" + text + "' (expected aic, bic, ebic[:eta], cv[:k])");
}

std::string Criterion::label() const {
  switch (kind) {
    case CriterionKind::aic: return "aic";
    case CriterionKind::bic: return "bic";
    case CriterionKind::ebic: {
      std::string s = std::to_string(eta);
      s.erase(s.find_last_not_of('0') + 1);
      if (!s.empty() && s.back() == '.') s.pop_back();
      return "ebic:" + s;
    }
    case CriterionKind::cv: return "cv:" + std::to_string(folds);
  }
  return "?";
}

double lambda_max(const Dataset& data, Family family) {
  validate(data, family);
  const auto [work, rec] = standardize(data);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(work.X.cols());
  theta(0) = null_intercept(work, family);
  const Eigen::VectorXd F = score(family, work, theta);
  const double lmax = F.tail(work.p()).cwiseAbs().maxCoeff() / static_cast<double>(work.n());
  if (!(lmax > 1e-14)) throw DataError("degenerate response: the null score vanishes");
  return lmax;
}

double default_ratio(const Dataset& data) { return data.n() > data.p() ? 0.01 : 0.05; }

std::vector<double> lambda_grid(const Dataset& data, Family family, int n_lambda, double ratio) {
  if (n_lambda < 2) throw ContractError("n_lambda must be >= 2");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractError("ratio must lie in (0, 1)");
  const double top = lambda_max(data, family);
  std::vector<double> grid(static_cast<std::size_t>(n_lambda));
  const double step = std::log(ratio) / (n_lambda - 1);
  for (int k = 0; k < n_lambda; ++k) grid[static_cast<std::size_t>(k)] = top * std::exp(step * k);
  grid.back() = top * ratio;
  return grid;
}

InformationCriteria information_criteria(const FitResult& fit, const Dataset& data, Family family,
                                         double eta) {
  const double nll = neg_loglik(family, data, fit.theta);
  const double df = static_cast<double>(fit.df());
  const double logn = std::log(static_cast<double>(data.n()));
  const double logp = std::log(static_cast<double>(std::max<Eigen::Index>(1, data.p())));
  InformationCriteria ic;
  ic.aic = 2.0 * nll + 2.0 * df;
  ic.bic = 2.0 * nll + df * logn;
  ic.ebic = ic.bic + 2.0 * eta * df * logp;
  return ic;
}

double criterion_value(const FitResult& fit, const Dataset& data, Family family, Criterion c) {
  const auto ic = information_criteria(fit, data, family, c.eta);
  switch (c.kind) {
    case CriterionKind::aic: return ic.aic;
    case CriterionKind::bic: return ic.bic;
    case CriterionKind::ebic: return ic.ebic;
    case CriterionKind::cv: break;
  }
  throw ContractError("criterion_value: cross-validation is not an information criterion");
}

namespace {

double pick(const InformationCriteria& ic, CriterionKind kind) {
  switch (kind) {
    case CriterionKind::aic: return ic.aic;
    case CriterionKind::bic: return ic.bic;
    case CriterionKind::ebic: return ic.ebic;
    case CriterionKind::cv: break;
  }
  throw ContractError("select_index: cross-validation requires cross_validate");
}

double second_deriv_safe(const PenaltySpec& spec, double beta) {
  try {
    return penalty_second_deriv(spec, beta);
  } catch (const KinkError&) {
    // At a SCAD/MCP breakpoint report the more concave side.
    const double eps = 1e-9 * std::max(1.0, beta);
    return std::min(penalty_second_deriv(spec, beta - eps), penalty_second_deriv(spec, beta + eps));
  }
}

}  // namespace

std::size_t select_index(const SolutionPath& path, Criterion c) {
  if (path.size() == 0) throw ContractError("select_index: empty path");
  if (c.kind == CriterionKind::ebic && c.eta != path.eta)
    throw ContractError("select_index: path criteria were computed with a different EBIC eta");
  std::size_t best = path.size();
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (!path.ok(k)) continue;
    const double v = pick(path.criteria[k], c.kind);
    if (best == path.size() || v < best_val) {
      best = k;
      best_val = v;
    }
  }
  if (best == path.size()) throw NumericalError("select_index: every fit on the path failed");
  return best;
}

ConvexityDiagnostic convexity_diagnostic_working(const Eigen::VectorXd& theta, const Dataset& work,
                                                 Family family, const PenaltySpec& spec) {
  std::vector<Eigen::Index> idx{0};
  for (Eigen::Index j = 1; j < theta.size(); ++j)
    if (theta(j) != 0.0) idx.push_back(j);
  const auto m = static_cast<Eigen::Index>(idx.size());
  const Eigen::VectorXd xi = work.X * theta;
  Eigen::VectorXd w(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) w(i) = obs_loss_curv(family, work.y(i), xi(i));
  Eigen::MatrixXd XA(work.n(), m);
  for (Eigen::Index c = 0; c < m; ++c) XA.col(c) = work.X.col(idx[static_cast<std::size_t>(c)]);
  Eigen::MatrixXd H = XA.transpose() * w.asDiagonal() * XA / static_cast<double>(work.n());
  for (Eigen::Index c = 1; c < m; ++c)
    H(c, c) += second_deriv_safe(spec, std::abs(theta(idx[static_cast<std::size_t>(c)])));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("convexity diagnostic: eigen solver failed");
  ConvexityDiagnostic d;
  d.min_eig = es.eigenvalues()(0);
  d.convex = d.min_eig > 0.0;
  return d;
}

ConvexityDiagnostic convexity_diagnostic(const FitResult& fit, const Dataset& data, Family family,
                                         const PenaltySpec& spec) {
  const auto [work, rec] = standardize(data);
  return convexity_diagnostic_working(restandardize(fit.theta, rec), work, family, spec);
}

SolutionPath fit_path(const Dataset& data, Family family, const PenaltySpec& spec_template,
                      const std::vector<double>& grid, const SolverConfig& cfg, const PathOptions& opts) {
  if (grid.empty()) throw ContractError("fit_path: empty lambda grid");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] < grid[k - 1])) throw ContractError("fit_path: lambda grid must be strictly decreasing");
  validate(data, family);

  Dataset standardized;
  Standardization rec = Standardization::identity(data.p());
  if (cfg.standardize) std::tie(standardized, rec) = standardize(data);
  const Dataset& work = cfg.standardize ? standardized : data;

  SolverConfig inner = cfg;
  inner.standardize = false;
  if (cfg.init == InitKind::warm) inner.warm_theta = restandardize(cfg.warm_theta, rec);

  SolutionPath path;
  path.eta = opts.eta;
  std::optional<Eigen::VectorXd> last;
  for (const double lambda : grid) {
    const PenaltySpec spec = spec_template.with_lambda(lambda);
    if (last) {
      inner.init = InitKind::warm;
      inner.warm_theta = *last;
    }
    path.lambdas.push_back(lambda);
    try {
      FitResult f = fit(work, family, spec, inner);
      last = f.theta;
      ConvexityDiagnostic diag{std::numeric_limits<double>::quiet_NaN(), false};
      if (opts.diagnostics) diag = convexity_diagnostic_working(f.theta, work, family, spec);
      f.theta = destandardize(f.theta, rec);
      path.df.push_back(f.df());
      path.criteria.push_back(information_criteria(f, data, family, opts.eta));
      path.min_eig.push_back(diag.min_eig);
      path.convex_flag.push_back(diag.convex ? 1 : 0);
      path.errors.emplace_back();
      path.fits.push_back(std::move(f));
    } catch (const Error& e) {
      path.fits.emplace_back();
      path.df.push_back(0);
      path.criteria.push_back({});
      path.min_eig.push_back(std::numeric_limits<double>::quiet_NaN());
      path.convex_flag.push_back(0);
      path.errors.emplace_back(e.what());
    }
    if (opts.max_df && path.ok(path.size() - 1) && path.df.back() > *opts.max_df) break;
  }
  return path;
}

std::vector<int> fold_assignment(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2) throw ContractError("cross-validation needs k >= 2");
  if (n < k) throw ContractError("cross-validation needs n >= k");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> folds(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < perm.size(); ++i) folds[static_cast<std::size_t>(perm[i])] = static_cast<int>(i % static_cast<std::size_t>(k));
  return folds;
}

namespace {

bool training_sets_ok(const Dataset& data, Family family, const std::vector<int>& folds, int k) {
  if (!family.is_binary()) return true;
  for (int f = 0; f < k; ++f) {
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      if (folds[static_cast<std::size_t>(i)] == f) continue;
      (data.y(i) > 0 ? pos : neg) = true;
    }
    if (!(pos && neg)) return false;
  }
  return true;
}

}  // namespace

CvCurve cross_validate(const Dataset& data, Family family, const PenaltySpec& spec_template,
                       const std::vector<double>& grid, int k, std::uint64_t seed, const SolverConfig& cfg,
                       std::optional<Eigen::Index> max_df) {
  validate(data, family);
  std::vector<int> folds = fold_assignment(data.n(), k, seed);
  if (!training_sets_ok(data, family, folds, k)) {
    folds = fold_assignment(data.n(), k, seed ^ 0x9e3779b97f4a7c15ULL);
    if (!training_sets_ok(data, family, folds, k))
      throw DataError("cross-validation: a training fold contains a single response class");
  }

  const std::size_t L = grid.size();
  std::vector<std::vector<double>> loss(static_cast<std::size_t>(k),
                                        std::vector<double>(L, std::numeric_limits<double>::infinity()));
  PathOptions popts;
  popts.diagnostics = false;
  popts.max_df = max_df;
  for (int f = 0; f < k; ++f) {
    std::vector<Eigen::Index> train, test;
    for (Eigen::Index i = 0; i < data.n(); ++i)
      (folds[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    const Dataset tr = subset_rows(data, train);
    const Dataset te = subset_rows(data, test);
    const SolutionPath path = fit_path(tr, family, spec_template, grid, cfg, popts);
    for (std::size_t l = 0; l < path.size(); ++l) {
      if (!path.ok(l)) continue;
      try {
        loss[static_cast<std::size_t>(f)][l] =
            neg_loglik(family, te, path.fits[l].theta) / static_cast<double>(te.n());
      } catch (const DomainError&) {
        // held-out linear predictor outside the domain: leave as +inf
      }
    }
  }

  CvCurve curve;
  curve.lambdas = grid;
  curve.mean.assign(L, std::numeric_limits<double>::infinity());
  curve.se.assign(L, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t l = 0; l < L; ++l) {
    double sum = 0.0, sq = 0.0;
    bool finite = true;
    for (int f = 0; f < k; ++f) {
      const double v = loss[static_cast<std::size_t>(f)][l];
      if (!std::isfinite(v)) {
        finite = false;
        break;
      }
      sum += v;
      sq += v * v;
    }
    if (!finite) continue;
    const double mean = sum / k;
    curve.mean[l] = mean;
    const double var = std::max(0.0, (sq - k * mean * mean) / (k - 1));
    curve.se[l] = std::sqrt(var / k);
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < L; ++l)
    if (curve.mean[l] < curve.mean[best]) best = l;
  if (!std::isfinite(curve.mean[best])) throw NumericalError("cross-validation: no lambda produced a finite loss");
  curve.best = best;
  return curve;
}

std::vector<double> default_lambda0_ladder(const Dataset& data, Family family, const PenaltySpec& spec_template,
                                           int count) {
  if (spec_template.kind != PenaltyKind::lamp) return {spec_template.lambda0};
  const double unit = max_concavity(spec_template.with_lambda0(1.0));
  if (unit == 0.0) return {spec_template.lambda0};
  validate(data, family);
  const auto [work, rec] = standardize(data);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(work.X.cols());
  theta(0) = null_intercept(work, family);
  const Eigen::VectorXd xi = work.X * theta;
  Eigen::VectorXd w(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) w(i) = obs_loss_curv(family, work.y(i), xi(i));
  double cmax = 0.0;
  for (Eigen::Index j = 1; j < work.X.cols(); ++j)
    cmax = std::max(cmax, work.X.col(j).cwiseAbs2().dot(w) / static_cast<double>(work.n()));
  const double top = cmax / unit;
  std::vector<double> ladder(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k)
    ladder[static_cast<std::size_t>(k)] = top * std::pow(1e-3, count == 1 ? 0.0 : double(k) / (count - 1));
  return ladder;
}

TuneReport hybrid_select(const Dataset& data, Family family, const PenaltySpec& spec_template,
                         const std::vector<double>& lambda0_ladder, Criterion criterion,
                         const SolverConfig& cfg, const HybridOptions& opts) {
  if (lambda0_ladder.empty()) throw ContractError("hybrid_select: empty lambda0 ladder");
  const std::vector<double> grid =
      lambda_grid(data, family, opts.n_lambda, opts.ratio.value_or(default_ratio(data)));
  TuneReport report;
  report.criterion_used = criterion;
  PathOptions popts;
  popts.eta = criterion.kind == CriterionKind::ebic ? criterion.eta : 1.0;
  popts.max_df = opts.max_df;
  for (const double lambda0 : lambda0_ladder) {
    const PenaltySpec spec = spec_template.with_lambda0(lambda0);
    const SolutionPath path = fit_path(data, family, spec, grid, cfg, popts);
    std::size_t idx = 0;
    std::optional<CvCurve> curve;
    if (criterion.kind == CriterionKind::cv) {
      curve = cross_validate(data, family, spec, grid, criterion.folds, opts.seed, cfg, opts.max_df);
      idx = curve->best;
      // The full-data path may have been truncated before the CV choice.
      if (idx >= path.size() || !path.ok(idx)) idx = select_index(path, Criterion::bic());
    } else {
      idx = select_index(path, criterion);
    }
    const bool stable = path.convex_flag[idx] != 0;
    report.visits.push_back({lambda0, path.lambdas[idx], path.min_eig[idx], stable});
    report.chosen_lambda0 = lambda0;
    report.chosen_lambda = path.lambdas[idx];
    report.cv_curve = curve;
    report.stable = stable;
    report.fit = path.fits[idx];
    if (stable) break;
  }
  return report;
}

}  // namespace lamp
