#include "lamp/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "lamp/normal.hpp"

namespace lamp {

// ---------------------------------------------------------------------------
// Designs
// ---------------------------------------------------------------------------

Eigen::Index SimDesign::q() const {
  return static_cast<Eigen::Index>((beta_true.array() != 0.0).count());
}

double SimDesign::zeta1() const {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < beta_true.size(); ++j)
    if (beta_true(j) != 0.0) m = std::min(m, std::abs(beta_true(j)));
  return m;
}

double SimDesign::zeta2() const {
  double m = 0.0;
  for (Eigen::Index j = 0; j < beta_true.size(); ++j) m = std::max(m, std::abs(beta_true(j)));
  return m;
}

Eigen::MatrixXd SimDesign::covariance() const {
  const auto d = p();
  Eigen::MatrixXd S(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      S(i, j) = cov_kind == CovKind::compound ? (i == j ? 1.0 : r)
                                              : std::pow(r, static_cast<double>(std::abs(i - j)));
  return S;
}

Eigen::VectorXd SimDesign::theta_true() const {
  Eigen::VectorXd t(p() + 1);
  t(0) = alpha_true;
  t.tail(p()) = beta_true;
  return t;
}

void SimDesign::validate() const {
  if (n < 2) throw ContractError("design: n must be >= 2");
  if (p() < 1) throw ContractError("design: beta_true is empty");
  if (!(std::abs(r) < 1.0)) throw ContractError("design: |r| must be < 1");
  if (reps < 1) throw ContractError("design: reps must be >= 1");
}

namespace {
Eigen::VectorXd padded(std::initializer_list<double> head, Eigen::Index p) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  Eigen::Index j = 0;
  for (const double v : head) b(j++) = v;
  return b;
}
}  // namespace

SimDesign SimDesign::logistic_highdim() {
  SimDesign d;
  d.name = "highdim";
  d.n = 200;
  d.alpha_true = 0.0;
  d.beta_true = padded({1.5, 1.0, -0.7}, 1000);
  d.cov_kind = CovKind::compound;
  d.r = 0.5;
  d.family = Family(FamilyKind::logistic);
  return d;
}

SimDesign SimDesign::logistic_ar1() {
  SimDesign d;
  d.name = "ar1";
  d.n = 200;
  d.alpha_true = -3.0;
  d.beta_true = padded({1.5, 1.0, -0.7}, 8);
  d.cov_kind = CovKind::ar1;
  d.r = 0.5;
  d.family = Family(FamilyKind::logistic);
  return d;
}

SimDesign SimDesign::poisson_design() {
  SimDesign d;
  d.name = "poisson";
  d.n = 250;
  d.alpha_true = -1.0;
  d.beta_true = padded({0.6, 0.4, 0.0, 0.0, 1.0}, 15);
  d.cov_kind = CovKind::compound;
  d.r = 0.5;
  d.family = Family(FamilyKind::poisson);
  return d;
}

SimDesign SimDesign::probit_design() {
  SimDesign d;
  d.name = "probit";
  d.n = 250;
  d.alpha_true = -2.0;
  d.beta_true = padded({3.0, 2.0, 1.0}, 11);
  d.cov_kind = CovKind::compound;
  d.r = 0.5;
  d.family = Family(FamilyKind::probit);
  return d;
}

SimDesign SimDesign::preset(const std::string& name) {
  if (name == "highdim") return logistic_highdim();
  if (name == "ar1") return logistic_ar1();
  if (name == "poisson") return poisson_design();
  if (name == "probit") return probit_design();
  throw ContractError("unknown design '" + name + "' (expected highdim, ar1, poisson, probit)");
}

// ---------------------------------------------------------------------------
// Penalty configurations
// ---------------------------------------------------------------------------

namespace {
std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw ContractError("cannot parse number '" + s + "' in '" + ctx + "'");
  }
}
}  // namespace

PenaltyConfig PenaltyConfig::parse(const std::string& raw) {
  const auto first = raw.find_first_not_of(" \t");
  const std::string text = first == std::string::npos ? "" : raw.substr(first, raw.find_last_not_of(" \t") - first + 1);
  const auto parts = split(text, ':');
  if (parts.empty()) throw ContractError("empty penalty configuration");
  PenaltyConfig c;
  c.label = text;
  const std::string& kind = parts[0];
  auto arg = [&](std::size_t i) {
    if (i >= parts.size()) throw ContractError("penalty '" + text + "' is missing a parameter");
    return to_double(parts[i], text);
  };
  auto lambda0_arg = [&](std::size_t i) {
    if (i < parts.size() && parts[i] == "hybrid") {
      c.hybrid = true;
      return 1.0;
    }
    return arg(i);
  };
  const std::size_t max_parts = kind == "oracle" || kind == "lasso" ? 1
                                : kind == "scad" || kind == "mcp" || kind == "poisson" ? 2
                                : kind == "lamp" ? 4
                                                 : 3;
  if (parts.size() > max_parts) throw ContractError("penalty '" + text + "' has too many parameters");
  if (kind == "oracle") {
    c.oracle = true;
  } else if (kind == "lasso") {
    c.spec = PenaltySpec::lasso(1.0);
  } else if (kind == "scad") {
    c.spec = PenaltySpec::scad(1.0, arg(1));
  } else if (kind == "mcp") {
    c.spec = PenaltySpec::mcp(1.0, arg(1));
  } else if (kind == "sigmoid") {
    c.spec = PenaltySpec::sigmoid(1.0, lambda0_arg(1), parts.size() > 2 ? arg(2) : 1.0);
  } else if (kind == "poisson") {
    c.spec = PenaltySpec::lamp(Family(FamilyKind::poisson), 1.0, lambda0_arg(1));
  } else if (kind == "probit") {
    const Family f(FamilyKind::probit);
    c.spec = PenaltySpec::lamp(f, 1.0, lambda0_arg(1), parts.size() > 2 ? arg(2) : f.default_alpha1());
  } else if (kind == "lamp") {
    if (parts.size() < 3) throw ContractError("lamp penalty needs lamp:<family>:<lambda0>[:alpha1]");
    const Family f = Family::from_name(parts[1]);
    c.spec = PenaltySpec::lamp(f, 1.0, lambda0_arg(2), parts.size() > 3 ? arg(3) : f.default_alpha1());
  } else {
    throw ContractError("unknown penalty '" + kind + "'");
  }
  if (!c.oracle) c.spec.validate();
  return c;
}

std::vector<PenaltyConfig> PenaltyConfig::parse_list(const std::string& text) {
  std::vector<PenaltyConfig> out;
  for (const auto& item : split(text, ','))
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse(item));
  if (out.empty()) throw ContractError("no penalty configurations given");
  return out;
}

// ---------------------------------------------------------------------------
// Random streams and data generation
// ---------------------------------------------------------------------------

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined key
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

Eigen::MatrixXd gen_covariates(const SimDesign& design, int rep_index) {
  design.validate();
  Eigen::LLT<Eigen::MatrixXd> llt(design.covariance());
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  std::mt19937_64 rng(stream_seed(design.seed, static_cast<std::uint64_t>(rep_index), 0));
  std::normal_distribution<double> norm(0.0, 1.0);
  Eigen::MatrixXd Z(design.n, design.p());
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    for (Eigen::Index j = 0; j < Z.cols(); ++j) Z(i, j) = norm(rng);
  return Z * L.transpose();
}

Eigen::VectorXd gen_response(const SimDesign& design, const Eigen::MatrixXd& X, int rep_index) {
  std::mt19937_64 rng(stream_seed(design.seed, static_cast<std::uint64_t>(rep_index), 1));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> norm(0.0, 1.0);
  const Eigen::VectorXd xi = (X * design.beta_true).array() + design.alpha_true;
  Eigen::VectorXd y(xi.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    switch (design.family.kind()) {
      case FamilyKind::logistic: y(i) = unif(rng) < detail::sigmoid(xi(i)) ? 1.0 : -1.0; break;
      case FamilyKind::probit: y(i) = xi(i) + norm(rng) > 0.0 ? 1.0 : -1.0; break;
      case FamilyKind::poisson: {
        if (xi(i) > 30.0) throw ContractError("design: Poisson mean overflow (xi > 30)");
        std::poisson_distribution<long> pois(std::exp(xi(i)));
        y(i) = static_cast<double>(pois(rng));
        break;
      }
      case FamilyKind::gaussian: y(i) = xi(i) + norm(rng); break;
      default: throw ContractError("design: response generation not supported for this family");
    }
  }
  return y;
}

Dataset gen_dataset(const SimDesign& design, int rep_index) {
  const Eigen::MatrixXd X = gen_covariates(design, rep_index);
  return make_dataset(X, gen_response(design, X, rep_index));
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

ReplicationMetrics evaluate(const Eigen::VectorXd& theta_hat, const SimDesign& design) {
  if (theta_hat.size() != design.p() + 1) throw ContractError("evaluate: theta_hat must have length p + 1");
  ReplicationMetrics m;
  const Eigen::VectorXd bhat = theta_hat.tail(design.p());
  for (Eigen::Index j = 0; j < design.p(); ++j) {
    const bool selected = bhat(j) != 0.0;
    if (design.beta_true(j) != 0.0)
      m.tp += selected;
    else
      m.fp += selected;
  }
  const int q = static_cast<int>(design.q());
  m.cf = m.tp == q && m.fp == 0;
  m.of = m.tp == q && m.fp > 0;
  m.uf = m.tp < q;
  const Eigen::VectorXd d = bhat - design.beta_true;
  m.l1 = d.cwiseAbs().sum();
  m.l2 = d.squaredNorm();
  m.model_error = model_error(theta_hat, design);
  return m;
}

double model_error(const Eigen::VectorXd& theta_hat, const SimDesign& design) {
  const Eigen::VectorXd d = theta_hat - design.theta_true();
  const Eigen::VectorXd db = d.tail(design.p());
  return d(0) * d(0) + db.dot(design.covariance() * db);
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(values.size() - 1, lo + 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double mrme(std::vector<double> ratios) { return quantile(std::move(ratios), 0.5); }

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double m = static_cast<double>(values.size());
  double sum = 0.0;
  for (const double v : values) sum += v;
  out.mean = sum / m;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (const double v : values) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (m - 1.0) / m);
  return out;
}

BoxStats BoxStats::of(const std::vector<double>& values) {
  return {quantile(values, 0.0), quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75),
          quantile(values, 1.0)};
}

const SimRow& SimReport::row(const std::string& label) const {
  for (const auto& r : rows)
    if (r.label == label) return r;
  throw ContractError("no simulation row labelled '" + label + "'");
}

const StabilityRow& StabilityReport::row(const std::string& label) const {
  for (const auto& r : rows)
    if (r.label == label) return r;
  throw ContractError("no stability row labelled '" + label + "'");
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

namespace {

// Runs body(i) for i in [0, count) on up to `threads` workers. Results must be
// written to per-index slots so the outcome is schedule-independent.
template <class Body>
void parallel_for(int count, int threads, Body&& body) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) body(i);
    });
}

std::size_t select_on_path(const SolutionPath& path, const Dataset& data, Family family, const PenaltySpec& spec,
                           const std::vector<double>& grid, Criterion selection, const SolverConfig& solver,
                           std::optional<Eigen::Index> max_df, std::uint64_t cv_seed) {
  if (selection.kind != CriterionKind::cv) return select_index(path, selection);
  const CvCurve curve = cross_validate(data, family, spec, grid, selection.folds, cv_seed, solver, max_df);
  std::size_t idx = curve.best;
  if (idx >= path.size() || !path.ok(idx)) idx = select_index(path, Criterion::bic());
  return idx;
}

}  // namespace

SimReport run_table(const SimDesign& design, const std::vector<PenaltyConfig>& configs, const SimOptions& opts) {
  design.validate();
  const int reps = design.reps;
  const std::size_t C = configs.size();
  std::vector<std::vector<ReplicationMetrics>> results(static_cast<std::size_t>(reps),
                                                       std::vector<ReplicationMetrics>(C));
  PathOptions popts;
  popts.diagnostics = false;
  popts.eta = opts.selection.kind == CriterionKind::ebic ? opts.selection.eta : 1.0;
  popts.max_df = opts.max_df;

  parallel_for(reps, opts.threads, [&](int rep) {
    auto& slot = results[static_cast<std::size_t>(rep)];
    Dataset data;
    std::vector<double> grid;
    try {
      data = gen_dataset(design, rep);
      grid = lambda_grid(data, design.family, opts.n_lambda, opts.ratio.value_or(default_ratio(data)));
    } catch (const Error& e) {
      for (auto& m : slot) {
        m.failed = true;
        m.error = e.what();
      }
      return;
    }
    std::optional<double> me_full;
    if (opts.compute_mrme && data.n() > data.p() + 1) {
      try {
        me_full = model_error(fit_mle(data, design.family), design);
      } catch (const Error&) {
        me_full.reset();
      }
    }
    for (std::size_t c = 0; c < C; ++c) {
      auto& m = slot[c];
      try {
        Eigen::VectorXd theta;
        double lambda = 0.0;
        const std::uint64_t cv_seed =
            stream_seed(design.seed, static_cast<std::uint64_t>(rep), 7 + opts.cv_seed_offset);
        if (configs[c].oracle) {
          theta = design.theta_true();
        } else if (configs[c].hybrid) {
          HybridOptions hopts;
          hopts.n_lambda = opts.n_lambda;
          hopts.ratio = opts.ratio;
          hopts.seed = cv_seed;
          hopts.max_df = opts.max_df;
          const TuneReport t =
              hybrid_select(data, design.family, configs[c].spec,
                            default_lambda0_ladder(data, design.family, configs[c].spec), opts.selection,
                            opts.solver, hopts);
          theta = t.fit.theta;
          lambda = t.chosen_lambda;
        } else {
          const SolutionPath path = fit_path(data, design.family, configs[c].spec, grid, opts.solver, popts);
          const std::size_t idx =
              select_on_path(path, data, design.family, configs[c].spec, grid, opts.selection, opts.solver,
                             opts.max_df, cv_seed);
          theta = path.fits[idx].theta;
          lambda = path.lambdas[idx];
        }
        m = evaluate(theta, design);
        m.lambda = lambda;
        if (me_full && *me_full > 0.0) m.me_ratio = m.model_error / *me_full;
      } catch (const Error& e) {
        m = ReplicationMetrics{};
        m.failed = true;
        m.error = e.what();
      }
    }
  });

  SimReport report;
  report.design = design.name;
  report.selection = opts.selection.label();
  report.reps_completed = reps;
  for (std::size_t c = 0; c < C; ++c) {
    SimRow row;
    row.label = configs[c].label;
    std::vector<double> tp, fp, cf, of, uf, l1, l2, ratios;
    for (int rep = 0; rep < reps; ++rep) {
      const auto& m = results[static_cast<std::size_t>(rep)][c];
      row.replications.push_back(m);
      if (m.failed) {
        ++row.failures;
        continue;
      }
      tp.push_back(m.tp);
      fp.push_back(m.fp);
      cf.push_back(m.cf);
      of.push_back(m.of);
      uf.push_back(m.uf);
      l1.push_back(m.l1);
      l2.push_back(m.l2);
      if (m.me_ratio)
        ratios.push_back(*m.me_ratio);
      else
        ++row.mrme_excluded;
    }
    row.reps_completed = static_cast<int>(tp.size());
    row.tp = mean_se(tp);
    row.fp = mean_se(fp);
    row.cf = mean_se(cf);
    row.of = mean_se(of);
    row.uf = mean_se(uf);
    row.l1 = mean_se(l1);
    row.l2 = mean_se(l2);
    row.l1_median = quantile(l1, 0.5);
    row.l2_median = quantile(l2, 0.5);
    row.mrme_used = static_cast<int>(ratios.size());
    if (!ratios.empty()) row.mrme = mrme(ratios);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void perturb_covariates(Dataset& data, double sd, std::uint64_t seed, int rep_index) {
  if (sd == 0.0) return;
  if (!(sd > 0.0)) throw ContractError("perturbation sd must be >= 0");
  std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(rep_index), 2));
  std::normal_distribution<double> norm(0.0, sd);
  for (Eigen::Index j = 1; j < data.X.cols(); ++j)
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) data.X(i, j) += norm(rng);
}

StabilityReport stability_experiment(const SimDesign& design, const std::vector<PenaltyConfig>& configs,
                                     const StabilityOptions& opts) {
  design.validate();
  if (opts.cv_repeats < 2) throw ContractError("stability experiment needs cv_repeats >= 2");
  for (const auto& cfg : configs)
    if (cfg.hybrid) throw ContractError("stability experiment needs a fixed lambda0 ('" + cfg.label + "')");
  const int reps = design.reps;
  const std::size_t C = configs.size();
  struct Cell {
    double lambda_sd = 0.0;
    double coef_sd = 0.0;
    bool failed = false;
  };
  std::vector<std::vector<Cell>> cells(static_cast<std::size_t>(reps), std::vector<Cell>(C));
  PathOptions popts;
  popts.diagnostics = false;
  popts.max_df = opts.max_df;

  parallel_for(reps, opts.threads, [&](int rep) {
    auto& slot = cells[static_cast<std::size_t>(rep)];
    Dataset data;
    std::vector<double> grid;
    try {
      data = gen_dataset(design, rep);
      perturb_covariates(data, opts.perturb_sd, design.seed, rep);
      grid = lambda_grid(data, design.family, opts.n_lambda, opts.ratio.value_or(default_ratio(data)));
    } catch (const Error&) {
      for (auto& c : slot) c.failed = true;
      return;
    }
    for (std::size_t c = 0; c < C; ++c) {
      try {
        if (configs[c].oracle) continue;
        const auto& spec = configs[c].spec;
        const SolutionPath path = fit_path(data, design.family, spec, grid, opts.solver, popts);
        std::vector<double> lambdas;
        std::vector<Eigen::VectorXd> coefs;
        for (int r = 0; r < opts.cv_repeats; ++r) {
          const std::uint64_t fold_seed =
              stream_seed(design.seed, static_cast<std::uint64_t>(rep), 1000 + (opts.vary_fold_seed ? r : 0));
          const CvCurve curve =
              cross_validate(data, design.family, spec, grid, opts.folds, fold_seed, opts.solver, opts.max_df);
          std::size_t idx = curve.best;
          if (idx >= path.size() || !path.ok(idx)) idx = select_index(path, Criterion::bic());
          lambdas.push_back(path.lambdas[idx]);
          coefs.push_back(path.fits[idx].theta.tail(design.p()));
        }
        const double m = static_cast<double>(lambdas.size());
        auto sd_of = [m](const std::vector<double>& v) {
          if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return 0.0;
          double mean = 0.0;
          for (const double x : v) mean += x;
          mean /= m;
          double ss = 0.0;
          for (const double x : v) ss += (x - mean) * (x - mean);
          return std::sqrt(ss / (m - 1.0));
        };
        slot[c].lambda_sd = sd_of(lambdas);
        double coef_total = 0.0;
        for (Eigen::Index j = 0; j < design.p(); ++j) {
          std::vector<double> col;
          for (const auto& b : coefs) col.push_back(b(j));
          coef_total += sd_of(col);
        }
        slot[c].coef_sd = coef_total / static_cast<double>(design.p());
      } catch (const Error&) {
        slot[c].failed = true;
      }
    }
  });

  StabilityReport report;
  report.design = design.name;
  report.perturb_sd = opts.perturb_sd;
  for (std::size_t c = 0; c < C; ++c) {
    StabilityRow row;
    row.label = configs[c].label;
    for (int rep = 0; rep < reps; ++rep) {
      const Cell& cell = cells[static_cast<std::size_t>(rep)][c];
      if (cell.failed) {
        ++row.failures;
        continue;
      }
      row.lambda_sd.push_back(cell.lambda_sd);
      row.coef_sd.push_back(cell.coef_sd);
    }
    row.lambda_box = BoxStats::of(row.lambda_sd);
    row.coef_box = BoxStats::of(row.coef_sd);
    report.rows.push_back(std::move(row));
  }
  return report;
}

double max_adjacent_jump(const Eigen::MatrixXd& coefficients) {
  double jump = 0.0;
  for (Eigen::Index k = 1; k < coefficients.rows(); ++k) {
    const auto a = coefficients.row(k - 1).tail(coefficients.cols() - 1);
    const auto b = coefficients.row(k).tail(coefficients.cols() - 1);
    jump = std::max(jump, (a - b).cwiseAbs().maxCoeff());
  }
  return jump;
}

std::vector<PathTrace> path_smoothness_export(const SimDesign& design, const std::vector<PenaltyConfig>& configs,
                                              int rep_index, int n_lambda, int folds, const SolverConfig& solver) {
  const Dataset data = gen_dataset(design, rep_index);
  const auto grid = lambda_grid(data, design.family, n_lambda, default_ratio(data));
  PathOptions popts;
  popts.diagnostics = false;
  std::vector<PathTrace> traces;
  for (const auto& cfg : configs) {
    if (cfg.oracle) continue;
    const SolutionPath path = fit_path(data, design.family, cfg.spec, grid, solver, popts);
    PathTrace t;
    t.label = cfg.label;
    t.lambdas = path.lambdas;
    t.coefficients.resize(static_cast<Eigen::Index>(path.size()), design.p() + 1);
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (path.ok(k))
        t.coefficients.row(static_cast<Eigen::Index>(k)) = path.fits[k].theta.transpose();
      else
        t.coefficients.row(static_cast<Eigen::Index>(k)).setConstant(std::numeric_limits<double>::quiet_NaN());
    }
    t.bic_index = select_index(path, Criterion::bic());
    const CvCurve curve = cross_validate(data, design.family, cfg.spec, grid, folds,
                                         stream_seed(design.seed, static_cast<std::uint64_t>(rep_index), 5000), solver);
    t.cv_index = curve.best;
    t.max_adjacent_jump = max_adjacent_jump(t.coefficients);
    traces.push_back(std::move(t));
  }
  return traces;
}

}  // namespace lamp
