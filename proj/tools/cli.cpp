#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lamp/errors.hpp"

namespace lamp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "family",    "penalty",     "generator",  "lambda",        "lambda0",     "alpha1",      "rho",
      "a",         "gamma",       "tau",        "max_iter",      "approx",      "sweep",       "init",
      "n_lambda",  "ratio",       "criterion",  "seed",          "input",       "response",    "header",
      "constant_columns",         "output_dir", "threads",       "max_df",      "diagnostics", "lambda0_ladder",
      "folds",     "design",      "reps",       "penalties",     "perturb_sd",  "cv_repeats",  "mrme",
      "rep",       "curves",      "beta_max",   "points"};
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_known(const std::string& key) {
  const auto& k = known_keys();
  return std::find(k.begin(), k.end(), key) != k.end();
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

}  // namespace

KeyValues parse_config(std::istream& in, const std::string& origin) {
  KeyValues kv;
  std::vector<std::string> problems;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      problems.push_back(where + ": expected key = value");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    if (!is_known(key)) {
      problems.push_back(where + ": unknown key '" + key + "'");
      continue;
    }
    kv[key] = trim(t.substr(eq + 1));
  }
  if (!problems.empty()) throw ConfigError(join(problems, "\n"));
  return kv;
}

KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in, path);
}

// ---------------------------------------------------------------------------
// Resolution and validation
// ---------------------------------------------------------------------------

namespace {

class Resolver {
 public:
  Resolver(const KeyValues& values, KeyValues& resolved) : values_(values), resolved_(resolved) {}

  std::vector<std::string> problems;

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback) {
    const auto it = values_.find(key);
    const std::string v = it == values_.end() ? fallback : it->second;
    resolved_[key] = v;
    return v;
  }

  std::optional<double> real(const std::string& key, const std::string& default_note = "") {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      if (!default_note.empty()) resolved_[key] = default_note;
      return std::nullopt;
    }
    resolved_[key] = it->second;
    double v = 0.0;
    if (!parse_double(it->second, v) || !std::isfinite(v)) {
      problems.push_back(key + ": not a finite number: '" + it->second + "'");
      return std::nullopt;
    }
    return v;
  }

  double real_or(const std::string& key, double fallback) {
    if (!has(key)) {
      resolved_[key] = format_double(fallback);
      return fallback;
    }
    return real(key).value_or(fallback);
  }

  std::optional<long long> integer(const std::string& key, const std::string& default_note = "") {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      if (!default_note.empty()) resolved_[key] = default_note;
      return std::nullopt;
    }
    resolved_[key] = it->second;
    long long v = 0;
    const std::string& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      problems.push_back(key + ": not an integer: '" + s + "'");
      return std::nullopt;
    }
    return v;
  }

  long long integer_or(const std::string& key, long long fallback) {
    if (!has(key)) {
      resolved_[key] = std::to_string(fallback);
      return fallback;
    }
    return integer(key).value_or(fallback);
  }

  bool boolean_or(const std::string& key, bool fallback) {
    const std::string v = text(key, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    problems.push_back(key + ": expected true or false, got '" + v + "'");
    return fallback;
  }

  void require(bool ok, const std::string& message) {
    if (!ok) problems.push_back(message);
  }

  template <class F>
  void attempt(const std::string& key, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      problems.push_back(key + ": " + e.what());
    }
  }

 private:
  const KeyValues& values_;
  KeyValues& resolved_;
};

const char* default_penalties(const std::string& design) {
  if (design == "highdim") return "lasso,sigmoid:0.05";
  if (design == "ar1") return "lasso,sigmoid:0.1,scad:21,mcp:20";
  if (design == "poisson") return "lasso,poisson:hybrid,scad:3.7,mcp:3";
  if (design == "probit") return "lasso,probit:hybrid,scad:3.7,mcp:3";
  return "lasso";
}

// Four curves sharing maximum concavity 1/1.1.
constexpr const char* kDefaultCurves = "mcp:1.1,scad:2.1,sigmoid:1.8181818181818181,poisson:0.90909090909090906";

bool is_data_command(const std::string& c) { return c == "fit" || c == "path" || c == "cv" || c == "tune"; }

}  // namespace

RunConfig resolve(const std::string& command, const KeyValues& values) {
  RunConfig cfg;
  cfg.command = command;
  Resolver r(values, cfg.resolved);
  cfg.resolved["command"] = command;

  r.attempt("family", [&] { cfg.family = Family::from_name(r.text("family", "gaussian")); });

  // Penalty
  const std::string kind = r.text("penalty", "lasso");
  const auto lambda = r.real("lambda", command == "fit" ? "" : "grid");
  cfg.lambda = lambda;
  const double lam_for_spec = lambda.value_or(1.0);
  if (kind == "lasso") {
    cfg.penalty = PenaltySpec::lasso(lam_for_spec);
  } else if (kind == "scad") {
    cfg.penalty = PenaltySpec::scad(lam_for_spec, r.real_or("a", 3.7));
  } else if (kind == "mcp") {
    cfg.penalty = PenaltySpec::mcp(lam_for_spec, r.real_or("gamma", 3.0));
  } else if (kind == "lamp" || kind == "sigmoid") {
    Family gen(FamilyKind::logistic);
    if (kind == "lamp")
      r.attempt("generator", [&] { gen = Family::from_name(r.text("generator", std::string(cfg.family.name()))); });
    const double lambda0 = r.real_or("lambda0", 1.0);
    const auto alpha1 = r.real("alpha1");
    const auto rho = r.real("rho");
    r.require(!(alpha1 && rho), "alpha1 and rho are mutually exclusive");
    double a1 = gen.default_alpha1();
    if (alpha1) a1 = *alpha1;
    if (rho) {
      r.require(gen.kind() == FamilyKind::logistic, "rho applies to the logistic generator only");
      r.require(*rho > 0.0, "rho must be > 0");
      if (*rho > 0.0) a1 = std::log(*rho);
    }
    cfg.resolved["alpha1"] = format_double(a1);
    cfg.penalty = PenaltySpec::lamp(gen, lam_for_spec, lambda0, a1);
  } else {
    r.problems.push_back("penalty: unknown kind '" + kind + "' (lasso, scad, mcp, lamp, sigmoid)");
  }
  if (lambda) r.require(*lambda >= 0.0, "lambda must be >= 0");
  r.attempt("penalty", [&] {
    if (!lambda || *lambda > 0.0 || cfg.penalty.kind == PenaltyKind::lasso)
      cfg.penalty.with_lambda(lambda && *lambda > 0.0 ? *lambda : 1.0).validate();
  });
  if (lambda && *lambda == 0.0 && cfg.penalty.kind != PenaltyKind::lasso)
    r.problems.push_back("lambda = 0 is only allowed for lasso");

  // Solver
  if (const auto tau = r.real("tau", "1e-4*n")) {
    r.require(*tau > 0.0, "tau must be > 0");
    cfg.solver.tau = *tau;
  }
  if (const auto it = r.integer("max_iter", "1000*p")) {
    r.require(*it >= 1, "max_iter must be >= 1");
    cfg.solver.max_iter = static_cast<long>(*it);
  }
  const std::string approx = r.text("approx", "auto");
  if (approx == "bound") {
    cfg.solver.approx = ApproxMethod::bound;
    r.require(cfg.family.kind() == FamilyKind::logistic, "approx = bound requires family = logistic");
  } else if (approx == "taylor") {
    cfg.solver.approx = ApproxMethod::taylor;
  } else if (approx != "auto") {
    r.problems.push_back("approx: expected auto, bound or taylor");
  }
  const std::string sweep = r.text("sweep", "greedy");
  if (sweep == "active_set")
    cfg.solver.sweep = SweepStrategy::active_set;
  else if (sweep != "greedy")
    r.problems.push_back("sweep: expected greedy or active_set");
  const std::string init = r.text("init", "zeros");
  if (init == "mle")
    cfg.solver.init = InitKind::mle;
  else if (init != "zeros")
    r.problems.push_back("init: expected zeros or mle");

  // Path and tuning
  cfg.n_lambda = static_cast<int>(r.integer_or("n_lambda", 100));
  r.require(cfg.n_lambda >= 1, "n_lambda must be >= 1");
  if (const auto ratio = r.real("ratio", "auto")) {
    r.require(*ratio > 0.0 && *ratio < 1.0, "ratio must lie in (0, 1)");
    cfg.ratio = *ratio;
  }
  cfg.folds = static_cast<int>(r.integer_or("folds", 10));
  r.require(cfg.folds >= 2, "folds must be >= 2");
  const bool sim = command == "simulate" || command == "stability" || command == "traces";
  const std::string design_name =
      sim ? r.text("design", command == "simulate" ? "highdim" : "ar1") : std::string();
  const std::string default_criterion =
      command == "simulate" && design_name == "highdim" ? "ebic:1" : (command == "cv" ? "cv:" + std::to_string(cfg.folds) : "bic");
  r.attempt("criterion", [&] { cfg.criterion = Criterion::parse(r.text("criterion", default_criterion)); });
  if (command == "cv" && cfg.criterion.kind != CriterionKind::cv)
    r.problems.push_back("criterion: the cv command needs criterion = cv[:k]");
  if (const auto seed = r.integer("seed", "20240101")) {
    r.require(*seed >= 0, "seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*seed);
  }
  if (const auto md = r.integer("max_df", "none")) {
    r.require(*md >= 0, "max_df must be >= 0");
    cfg.max_df = static_cast<Eigen::Index>(*md);
  }
  cfg.diagnostics = r.boolean_or("diagnostics", true);
  if (r.has("lambda0_ladder")) {
    std::istringstream is(r.text("lambda0_ladder", ""));
    std::string item;
    while (std::getline(is, item, ',')) {
      double v = 0.0;
      if (!parse_double(item, v) || !(v > 0.0))
        r.problems.push_back("lambda0_ladder: entries must be positive numbers, got '" + trim(item) + "'");
      else
        cfg.lambda0_ladder.push_back(v);
    }
  } else {
    cfg.resolved["lambda0_ladder"] = "default";
  }
  if (command == "tune") r.require(cfg.penalty.kind == PenaltyKind::lamp, "tune needs a LAMP penalty (lamp or sigmoid)");

  // IO
  cfg.input = r.text("input", "");
  cfg.response = r.text("response", "y");
  cfg.ingest.has_header = r.boolean_or("header", true);
  const std::string cc = r.text("constant_columns", "error");
  if (cc == "drop")
    cfg.ingest.constant_columns = ConstantColumnPolicy::drop;
  else if (cc != "error")
    r.problems.push_back("constant_columns: expected error or drop");
  if (is_data_command(command)) r.require(!cfg.input.empty(), "input: a CSV path is required for '" + command + "'");
  if (command == "fit") r.require(lambda.has_value(), "lambda: required for 'fit'");
  const char* env_dir = std::getenv(kOutputDirEnv);
  cfg.output_dir = r.text("output_dir", env_dir && *env_dir ? env_dir : "lamp_output");
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  cfg.threads = static_cast<int>(r.integer_or("threads", hw));
  r.require(cfg.threads >= 1, "threads must be >= 1");

  // Simulation
  if (sim) {
    r.attempt("design", [&] { cfg.design = SimDesign::preset(design_name); });
    cfg.design.seed = cfg.seed;
    cfg.design.reps = static_cast<int>(r.integer_or("reps", 100));
    r.require(cfg.design.reps >= 1, "reps must be >= 1");
    r.attempt("penalties",
              [&] { cfg.penalties = PenaltyConfig::parse_list(r.text("penalties", default_penalties(design_name))); });
    cfg.perturb_sd = r.real_or("perturb_sd", 0.0);
    r.require(cfg.perturb_sd >= 0.0, "perturb_sd must be >= 0");
    cfg.cv_repeats = static_cast<int>(r.integer_or("cv_repeats", 100));
    if (command == "stability") r.require(cfg.cv_repeats >= 2, "cv_repeats must be >= 2");
    cfg.mrme = r.boolean_or("mrme", true);
    cfg.rep = static_cast<int>(r.integer_or("rep", 0));
    r.require(cfg.rep >= 0, "rep must be >= 0");
  }

  // Penalty curves
  if (command == "penalty-curve") {
    r.attempt("curves", [&] { cfg.curves = PenaltyConfig::parse_list(r.text("curves", kDefaultCurves)); });
    for (const auto& c : cfg.curves)
      r.require(!c.oracle && !c.hybrid, "curves: '" + c.label + "' has no fixed penalty");
    cfg.beta_max = r.real_or("beta_max", 3.0);
    r.require(cfg.beta_max > 0.0, "beta_max must be > 0");
    cfg.points = static_cast<int>(r.integer_or("points", 301));
    r.require(cfg.points >= 2, "points must be >= 2");
    if (!lambda) cfg.resolved["lambda"] = "1";
  }

  if (!r.problems.empty()) throw ConfigError(join(r.problems, "\n"));
  return cfg;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

namespace {

struct Outputs {
  fs::path dir;
  HeaderFields header;
  std::vector<std::string> artifacts;

  std::ofstream open(const std::string& name, bool with_header = true) {
    const fs::path p = dir / name;
    std::ofstream f(p);
    if (!f) throw DataError("cannot write '" + p.string() + "'");
    if (with_header) write_header(f, header);
    artifacts.push_back(p.string());
    return f;
  }
};

Outputs prepare_outputs(const RunConfig& cfg) {
  Outputs o;
  o.dir = cfg.output_dir;
  std::error_code ec;
  fs::create_directories(o.dir, ec);
  if (ec) throw DataError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
  for (const auto& [k, v] : cfg.resolved) o.header.emplace_back(k, v);
  return o;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(format_double(v)); }

void write_json(Outputs& o, const std::string& name, const json& j) {
  auto f = o.open(name, false);
  f << j.dump(2) << '\n';
}

IngestedCsv load(const RunConfig& cfg, json& summary) {
  IngestedCsv ing = ingest_csv(cfg.input, cfg.response, cfg.family, cfg.ingest);
  summary["n"] = ing.data.n();
  summary["p"] = ing.data.p();
  if (!ing.warnings.empty()) summary["warnings"] = ing.warnings;
  return ing;
}

std::vector<double> make_grid(const RunConfig& cfg, const Dataset& data) {
  return lambda_grid(data, cfg.family, cfg.n_lambda, cfg.ratio.value_or(default_ratio(data)));
}

json fit_record(const FitResult& fit, const Dataset& data, const RunConfig& cfg, const PenaltySpec& spec,
                const std::vector<std::string>& names) {
  json j;
  j["lambda"] = spec.lambda;
  j["penalty"] = spec.label();
  j["iterations"] = fit.iterations;
  j["final_viol"] = number(fit.final_viol);
  j["tau"] = fit.tau;
  j["converged"] = fit.converged;
  j["df"] = fit.df();
  j["objective"] = number(fit.objective);
  j["neg_loglik"] = number(neg_loglik(cfg.family, data, fit.theta));
  const double eta = cfg.criterion.kind == CriterionKind::ebic ? cfg.criterion.eta : 1.0;
  const auto ic = information_criteria(fit, data, cfg.family, eta);
  j["aic"] = number(ic.aic);
  j["bic"] = number(ic.bic);
  j["ebic"] = number(ic.ebic);
  j["ebic_eta"] = eta;
  std::vector<std::string> active;
  for (const auto k : fit.active_set) active.push_back(names[static_cast<std::size_t>(k - 1)]);
  j["active_set"] = active;
  if (cfg.diagnostics) {
    const auto d = convexity_diagnostic(fit, data, cfg.family, spec);
    j["min_eig"] = number(d.min_eig);
    j["convex"] = d.convex;
  }
  return j;
}

void cmd_fit(const RunConfig& cfg, Outputs& o, json& summary) {
  const IngestedCsv ing = load(cfg, summary);
  const PenaltySpec spec = cfg.penalty.with_lambda(*cfg.lambda);
  const FitResult fit = lamp::fit(ing.data, cfg.family, spec, cfg.solver);
  auto f = o.open("coefficients.csv");
  write_coefficients_csv(f, fit.theta, ing.predictors);
  json j = fit_record(fit, ing.data, cfg, spec, ing.predictors);
  j["lambda_max"] = lambda_max(ing.data, cfg.family);
  write_json(o, "fit.json", j);
  summary["df"] = fit.df();
  summary["converged"] = fit.converged;
}

void cmd_path(const RunConfig& cfg, Outputs& o, json& summary) {
  const IngestedCsv ing = load(cfg, summary);
  const auto grid = make_grid(cfg, ing.data);
  PathOptions popts;
  popts.diagnostics = cfg.diagnostics;
  popts.eta = cfg.criterion.kind == CriterionKind::ebic ? cfg.criterion.eta : 1.0;
  popts.max_df = cfg.max_df;
  const SolutionPath path = fit_path(ing.data, cfg.family, cfg.penalty, grid, cfg.solver, popts);
  {
    auto f = o.open("path.csv");
    write_path_csv(f, path, ing.predictors);
  }
  {
    auto f = o.open("path_summary.csv");
    write_path_summary_csv(f, path);
  }
  std::size_t idx = 0;
  if (cfg.criterion.kind == CriterionKind::cv) {
    const CvCurve curve = cross_validate(ing.data, cfg.family, cfg.penalty, grid, cfg.criterion.folds, cfg.seed,
                                         cfg.solver, cfg.max_df);
    auto f = o.open("cv.csv");
    write_cv_csv(f, curve);
    idx = curve.best < path.size() && path.ok(curve.best) ? curve.best : select_index(path, Criterion::bic());
  } else {
    idx = select_index(path, cfg.criterion);
  }
  std::size_t failures = 0;
  for (std::size_t k = 0; k < path.size(); ++k) failures += !path.ok(k);
  summary["lambdas"] = path.size();
  summary["failed_lambdas"] = failures;
  summary["selected_index"] = idx;
  summary["selected_lambda"] = path.lambdas[idx];
  summary["selected_df"] = path.df[idx];
}

json tune_record(const TuneReport& t) {
  json j;
  j["chosen_lambda0"] = t.chosen_lambda0;
  j["chosen_lambda"] = t.chosen_lambda;
  j["criterion"] = t.criterion_used.label();
  j["stable"] = t.stable;
  j["df"] = t.fit.df();
  json visits = json::array();
  for (const auto& v : t.visits)
    visits.push_back({{"lambda0", v.lambda0}, {"lambda", v.lambda}, {"min_eig", number(v.min_eig)}, {"stable", v.stable}});
  j["visits"] = visits;
  return j;
}

void cmd_cv(const RunConfig& cfg, Outputs& o, json& summary) {
  const IngestedCsv ing = load(cfg, summary);
  const auto grid = make_grid(cfg, ing.data);
  const CvCurve curve =
      cross_validate(ing.data, cfg.family, cfg.penalty, grid, cfg.criterion.folds, cfg.seed, cfg.solver, cfg.max_df);
  {
    auto f = o.open("cv.csv");
    write_cv_csv(f, curve);
  }
  const PenaltySpec spec = cfg.penalty.with_lambda(curve.best_lambda());
  PathOptions popts;
  popts.diagnostics = false;
  std::vector<double> head(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(curve.best) + 1);
  const SolutionPath path = fit_path(ing.data, cfg.family, cfg.penalty, head, cfg.solver, popts);
  if (!path.ok(curve.best)) throw NumericalError("fit at the selected lambda failed: " + path.errors[curve.best]);
  const FitResult& fit = path.fits[curve.best];
  {
    auto f = o.open("coefficients.csv");
    write_coefficients_csv(f, fit.theta, ing.predictors);
  }
  TuneReport t;
  t.chosen_lambda0 = cfg.penalty.lambda0;
  t.chosen_lambda = curve.best_lambda();
  t.criterion_used = cfg.criterion;
  t.fit = fit;
  const auto d = convexity_diagnostic(fit, ing.data, cfg.family, spec);
  t.stable = d.convex;
  t.visits.push_back({t.chosen_lambda0, t.chosen_lambda, d.min_eig, d.convex});
  json j = tune_record(t);
  j["cv_min"] = number(curve.mean[curve.best]);
  write_json(o, "tune.json", j);
  summary["selected_lambda"] = t.chosen_lambda;
  summary["df"] = fit.df();
}

void cmd_tune(const RunConfig& cfg, Outputs& o, json& summary) {
  const IngestedCsv ing = load(cfg, summary);
  const auto ladder =
      cfg.lambda0_ladder.empty() ? default_lambda0_ladder(ing.data, cfg.family, cfg.penalty) : cfg.lambda0_ladder;
  HybridOptions h;
  h.n_lambda = cfg.n_lambda;
  h.ratio = cfg.ratio;
  h.seed = cfg.seed;
  h.max_df = cfg.max_df;
  const TuneReport t = hybrid_select(ing.data, cfg.family, cfg.penalty, ladder, cfg.criterion, cfg.solver, h);
  {
    auto f = o.open("coefficients.csv");
    write_coefficients_csv(f, t.fit.theta, ing.predictors);
  }
  {
    auto f = o.open("tune_visits.csv");
    f << "lambda0,lambda,min_eig,stable\n";
    for (const auto& v : t.visits)
      f << format_double(v.lambda0) << ',' << format_double(v.lambda) << ',' << format_double(v.min_eig) << ','
        << (v.stable ? 1 : 0) << '\n';
  }
  if (t.cv_curve) {
    auto f = o.open("cv.csv");
    write_cv_csv(f, *t.cv_curve);
  }
  write_json(o, "tune.json", tune_record(t));
  summary["chosen_lambda0"] = t.chosen_lambda0;
  summary["chosen_lambda"] = t.chosen_lambda;
  summary["stable"] = t.stable;
}

void cmd_simulate(const RunConfig& cfg, Outputs& o, json& summary) {
  SimOptions opts;
  opts.selection = cfg.criterion;
  opts.n_lambda = cfg.n_lambda;
  opts.ratio = cfg.ratio;
  opts.solver = cfg.solver;
  opts.max_df = cfg.max_df;
  opts.compute_mrme = cfg.mrme;
  opts.threads = cfg.threads;
  const SimReport report = run_table(cfg.design, cfg.penalties, opts);
  {
    auto f = o.open("sim_report.csv");
    write_sim_report_csv(f, report);
  }
  {
    auto f = o.open("sim_replications.csv");
    write_sim_replications_csv(f, report);
  }
  auto f = o.open("sim_summary.txt");
  f << "design " << report.design << "\nselection " << report.selection << "\nreps " << report.reps_completed << '\n';
  for (const auto& r : report.rows) {
    f << "\n[" << r.label << "]\n";
    f << "  TP  " << format_double(r.tp.mean) << " (" << format_double(r.tp.se) << ")\n";
    f << "  FP  " << format_double(r.fp.mean) << " (" << format_double(r.fp.se) << ")\n";
    f << "  cf  " << format_double(r.cf.mean) << "  of " << format_double(r.of.mean) << "  uf "
      << format_double(r.uf.mean) << '\n';
    f << "  L1  " << format_double(r.l1.mean) << "  L2 " << format_double(r.l2.mean) << '\n';
    f << "  MRME " << format_double(r.mrme) << " over " << r.mrme_used << " reps\n";
    f << "  failures " << r.failures << '\n';
  }
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"penalty", r.label}, {"tp", number(r.tp.mean)}, {"fp", number(r.fp.mean)},
                    {"cf", number(r.cf.mean)}, {"mrme", number(r.mrme)}, {"failures", r.failures}});
  summary["rows"] = rows;
}

void cmd_stability(const RunConfig& cfg, Outputs& o, json& summary) {
  StabilityOptions opts;
  opts.perturb_sd = cfg.perturb_sd;
  opts.cv_repeats = cfg.cv_repeats;
  opts.folds = cfg.folds;
  opts.n_lambda = cfg.n_lambda;
  opts.ratio = cfg.ratio;
  opts.solver = cfg.solver;
  opts.max_df = cfg.max_df;
  opts.threads = cfg.threads;
  const StabilityReport report = stability_experiment(cfg.design, cfg.penalties, opts);
  {
    auto f = o.open("stability.csv");
    write_stability_csv(f, report);
  }
  auto f = o.open("stability_summary.txt");
  f << "design " << report.design << "\nperturb_sd " << format_double(report.perturb_sd) << '\n';
  json rows = json::array();
  for (const auto& r : report.rows) {
    f << "\n[" << r.label << "]\n  lambda_sd median " << format_double(r.lambda_box.median) << " q75 "
      << format_double(r.lambda_box.q75) << "\n  coef_sd median " << format_double(r.coef_box.median) << " q75 "
      << format_double(r.coef_box.q75) << "\n  failures " << r.failures << '\n';
    rows.push_back({{"penalty", r.label},
                    {"lambda_sd_median", number(r.lambda_box.median)},
                    {"lambda_sd_q75", number(r.lambda_box.q75)}});
  }
  summary["rows"] = rows;
}

void cmd_traces(const RunConfig& cfg, Outputs& o, json& summary) {
  const auto traces = path_smoothness_export(cfg.design, cfg.penalties, cfg.rep, cfg.n_lambda, cfg.folds, cfg.solver);
  auto f = o.open("traces.csv");
  write_path_traces_csv(f, traces);
  json rows = json::array();
  for (const auto& t : traces)
    rows.push_back({{"penalty", t.label},
                    {"max_adjacent_jump", number(t.max_adjacent_jump)},
                    {"bic_lambda", t.lambdas[t.bic_index]},
                    {"cv_lambda", t.lambdas[t.cv_index]}});
  summary["rows"] = rows;
}

void cmd_penalty_curve(const RunConfig& cfg, Outputs& o, json& summary) {
  const double lam = cfg.lambda.value_or(1.0);
  auto f = o.open("penalty_curve.csv");
  auto s = o.open("penalty_curve_summary.csv");
  s << "penalty,lambda,deriv_at_0,max_concavity\n";
  json rows = json::array();
  bool first = true;
  for (const auto& c : cfg.curves) {
    const PenaltySpec spec = c.spec.with_lambda(lam);
    write_penalty_curve_csv(f, c.label, penalty_curve(spec, cfg.beta_max, cfg.points), first);
    first = false;
    const double d0 = penalty_deriv(spec, 0.0);
    const double mc = max_concavity(spec);
    s << c.label << ',' << format_double(lam) << ',' << format_double(d0) << ',' << format_double(mc) << '\n';
    rows.push_back({{"penalty", c.label}, {"deriv_at_0", d0}, {"max_concavity", mc}});
  }
  summary["rows"] = rows;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ContractError*>(&e)) return exit_config;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DomainError*>(&e)) return exit_data;
  if (dynamic_cast<const NumericalError*>(&e)) return exit_numerical;
  return exit_internal;
}

const char* category_for(int code) {
  switch (code) {
    case exit_config: return "config";
    case exit_data: return "data";
    case exit_numerical: return "numerical";
    default: return "internal";
  }
}

int report_error(std::ostream& err, int code, const std::string& command, const std::string& message) {
  json rec;
  rec["status"] = "error";
  rec["category"] = category_for(code);
  rec["exit_code"] = code;
  if (!command.empty()) rec["command"] = command;
  std::vector<std::string> lines;
  std::istringstream is(message);
  for (std::string line; std::getline(is, line);)
    if (!line.empty()) lines.push_back(line);
  rec["errors"] = lines;
  err << rec.dump() << '\n';
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized GLM estimation with LAMP, LASSO, SCAD and MCP penalties", "lamp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs = {
      {"fit", "Fit at a single lambda"},
      {"path", "Fit a regularization path and export it"},
      {"cv", "Select lambda by k-fold cross-validation"},
      {"tune", "Hybrid (lambda0, lambda) selection with convexity diagnostics"},
      {"simulate", "Run a simulation design and report selection metrics"},
      {"stability", "Repeated-CV stability experiment"},
      {"traces", "Export coefficient paths with BIC and CV markers for a design"},
      {"penalty-curve", "Export penalty values and derivatives on a beta grid"},
  };
  std::map<std::string, KeyValues> flag_values;
  std::map<std::string, std::string> config_paths;
  std::map<std::string, CLI::App*> apps;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    apps[s.name] = sub;
    sub->add_option("--config", config_paths[s.name], "key = value configuration file");
    auto& store = flag_values[s.name];
    for (const auto& key : known_keys()) sub->add_option("--" + key, store[key]);
  }

  std::string command;
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(err, exit_config, "", e.what());
  }
  for (const auto& [name, sub] : apps)
    if (sub->parsed()) command = name;

  try {
    KeyValues values;
    if (!config_paths[command].empty()) values = read_config_file(config_paths[command]);
    CLI::App* sub = apps[command];
    for (const auto& key : known_keys())
      if (sub->get_option("--" + key)->count() > 0) values[key] = flag_values[command][key];
    const RunConfig cfg = resolve(command, values);

    Outputs o = prepare_outputs(cfg);
    json summary;
    summary["status"] = "ok";
    summary["command"] = command;
    if (command == "fit") cmd_fit(cfg, o, summary);
    else if (command == "path") cmd_path(cfg, o, summary);
    else if (command == "cv") cmd_cv(cfg, o, summary);
    else if (command == "tune") cmd_tune(cfg, o, summary);
    else if (command == "simulate") cmd_simulate(cfg, o, summary);
    else if (command == "stability") cmd_stability(cfg, o, summary);
    else if (command == "traces") cmd_traces(cfg, o, summary);
    else if (command == "penalty-curve") cmd_penalty_curve(cfg, o, summary);
    summary["artifacts"] = o.artifacts;
    out << summary.dump() << '\n';
    return exit_ok;
  } catch (const std::exception& e) {
    return report_error(err, exit_code_for(e), command, e.what());
  }
}

}  // namespace lamp::cli
