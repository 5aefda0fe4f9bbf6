#include "lamp/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "lamp/errors.hpp"

namespace lamp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, t.data() + t.size(), out);
  return res.ec == std::errc() && res.ptr == t.data() + t.size();
}

IngestedCsv ingest_csv(const std::string& path, const std::string& response_column, Family family,
                       const IngestOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return ingest_csv(in, response_column, family, opts);
}

IngestedCsv ingest_csv(std::istream& in, const std::string& response_column, Family family,
                       const IngestOptions& opts) {
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  bool header_pending = opts.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = split_fields(t);
    if (header_pending) {
      names = fields;
      header_pending = false;
      continue;
    }
    if (names.empty())
      for (std::size_t k = 0; k < fields.size(); ++k) names.push_back("V" + std::to_string(k + 1));
    if (fields.size() != names.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(names.size()) +
                      " fields, found " + std::to_string(fields.size()));
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k)
      if (!parse_double(fields[k], row[k]) || !std::isfinite(row[k]))
        throw DataError("line " + std::to_string(line_no) + ", column '" + names[k] + "': " +
                        (fields[k].empty() ? std::string("missing value") : "non-numeric value '" + fields[k] + "'"));
    rows.push_back(std::move(row));
  }
  if (names.empty()) throw DataError("empty CSV input");
  if (rows.size() < 2) throw DataError("CSV input needs at least 2 data rows");

  std::size_t resp = names.size();
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == response_column) resp = k;
  if (resp == names.size() && !opts.has_header) {
    double idx = 0;
    if (parse_double(response_column, idx) && idx >= 1 && idx <= static_cast<double>(names.size()) &&
        idx == std::floor(idx))
      resp = static_cast<std::size_t>(idx) - 1;
  }
  if (resp == names.size()) throw DataError("response column '" + response_column + "' not found");

  const auto n = static_cast<Eigen::Index>(rows.size());
  IngestedCsv out;
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < names.size(); ++k) {
    if (k == resp) continue;
    bool constant = true;
    for (const auto& r : rows) constant = constant && r[k] == rows[0][k];
    if (constant) {
      if (opts.constant_columns == ConstantColumnPolicy::error)
        throw DataError("predictor '" + names[k] + "' is constant");
      out.warnings.push_back("dropped constant predictor '" + names[k] + "'");
      continue;
    }
    keep.push_back(k);
    out.predictors.push_back(names[k]);
  }

  Eigen::MatrixXd P(n, static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < keep.size(); ++c) P(i, static_cast<Eigen::Index>(c)) = r[keep[c]];
    y(i) = r[resp];
  }
  if (family.is_binary()) {
    std::set<double> classes(y.data(), y.data() + n);
    const bool zero_one = std::all_of(classes.begin(), classes.end(), [](double v) { return v == 0.0 || v == 1.0; });
    const bool pm_one = std::all_of(classes.begin(), classes.end(), [](double v) { return v == -1.0 || v == 1.0; });
    if (!zero_one && !pm_one) throw DataError("binary response must be coded {0,1} or {-1,1}");
    if (classes.size() < 2) throw DataError("degenerate response: a single class is present");
    if (zero_one) y = (y.array() == 0.0).select(-1.0, y);
  }
  out.data = make_dataset(P, y);
  validate(out.data, family);
  return out;
}

void write_header(std::ostream& out, const HeaderFields& fields) {
  for (const auto& [k, v] : fields) out << "# " << k << '=' << v << '\n';
}

void write_dataset_csv(std::ostream& out, const Dataset& data, const std::vector<std::string>& predictors,
                       const std::string& response_name) {
  for (const auto& name : predictors) out << name << ',';
  out << response_name << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 1; j < data.X.cols(); ++j) out << format_double(data.X(i, j)) << ',';
    out << format_double(data.y(i)) << '\n';
  }
}

namespace {
std::string term_name(Eigen::Index j, const std::vector<std::string>& predictors) {
  if (j == 0) return "(intercept)";
  const auto k = static_cast<std::size_t>(j - 1);
  return k < predictors.size() ? predictors[k] : "x" + std::to_string(j);
}
}  // namespace

void write_coefficients_csv(std::ostream& out, const Eigen::VectorXd& theta,
                            const std::vector<std::string>& predictors) {
  out << "term,coefficient\n";
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    out << term_name(j, predictors) << ',' << format_double(theta(j)) << '\n';
}

void write_path_csv(std::ostream& out, const SolutionPath& path, const std::vector<std::string>& predictors) {
  out << "lambda,term,coefficient\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (!path.ok(k)) continue;
    const auto& theta = path.fits[k].theta;
    for (Eigen::Index j = 0; j < theta.size(); ++j)
      out << format_double(path.lambdas[k]) << ',' << term_name(j, predictors) << ',' << format_double(theta(j))
          << '\n';
  }
}

void write_path_summary_csv(std::ostream& out, const SolutionPath& path) {
  out << "lambda,df,aic,bic,ebic,min_eig,convex,iterations,converged,error\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    out << format_double(path.lambdas[k]) << ',';
    if (!path.ok(k)) {
      std::string msg = path.errors[k];
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out << ",,,,,,,," << msg << '\n';
      continue;
    }
    const auto& c = path.criteria[k];
    out << path.df[k] << ',' << format_double(c.aic) << ',' << format_double(c.bic) << ',' << format_double(c.ebic)
        << ',';
    if (k < path.min_eig.size())
      out << format_double(path.min_eig[k]) << ',' << (path.convex_flag[k] ? 1 : 0);
    else
      out << ',';
    out << ',' << path.fits[k].iterations << ',' << (path.fits[k].converged ? 1 : 0) << ",\n";
  }
}

void write_cv_csv(std::ostream& out, const CvCurve& curve) {
  out << "lambda,cv_mean,cv_se,selected\n";
  for (std::size_t k = 0; k < curve.lambdas.size(); ++k)
    out << format_double(curve.lambdas[k]) << ',' << format_double(curve.mean[k]) << ','
        << format_double(curve.se[k]) << ',' << (k == curve.best ? 1 : 0) << '\n';
}

void write_sim_report_csv(std::ostream& out, const SimReport& report) {
  out << "design,selection,penalty,reps,failures,tp,tp_se,fp,fp_se,cf,cf_se,of,of_se,uf,uf_se,"
         "l1_mean,l1_se,l1_median,l2_mean,l2_se,l2_median,mrme,mrme_used,mrme_excluded\n";
  for (const auto& r : report.rows) {
    out << report.design << ',' << report.selection << ',' << r.label << ',' << r.reps_completed << ','
        << r.failures;
    for (const MeanSe* m : {&r.tp, &r.fp, &r.cf, &r.of, &r.uf})
      out << ',' << format_double(m->mean) << ',' << format_double(m->se);
    out << ',' << format_double(r.l1.mean) << ',' << format_double(r.l1.se) << ',' << format_double(r.l1_median);
    out << ',' << format_double(r.l2.mean) << ',' << format_double(r.l2.se) << ',' << format_double(r.l2_median);
    out << ',' << format_double(r.mrme) << ',' << r.mrme_used << ',' << r.mrme_excluded << '\n';
  }
}

void write_sim_replications_csv(std::ostream& out, const SimReport& report) {
  out << "penalty,rep,failed,tp,fp,cf,of,uf,l1,l2,model_error,me_ratio,lambda\n";
  for (const auto& r : report.rows)
    for (std::size_t i = 0; i < r.replications.size(); ++i) {
      const auto& m = r.replications[i];
      out << r.label << ',' << i << ',' << (m.failed ? 1 : 0) << ',' << m.tp << ',' << m.fp << ',' << m.cf << ','
          << m.of << ',' << m.uf << ',' << format_double(m.l1) << ',' << format_double(m.l2) << ','
          << format_double(m.model_error) << ',' << (m.me_ratio ? format_double(*m.me_ratio) : "") << ','
          << format_double(m.lambda) << '\n';
    }
}

void write_stability_csv(std::ostream& out, const StabilityReport& report) {
  out << "penalty,quantity,min,q25,median,q75,max,reps,failures\n";
  for (const auto& r : report.rows) {
    const auto line = [&](const char* what, const BoxStats& b, std::size_t count) {
      out << r.label << ',' << what << ',' << format_double(b.min) << ',' << format_double(b.q25) << ','
          << format_double(b.median) << ',' << format_double(b.q75) << ',' << format_double(b.max) << ','
          << count << ',' << r.failures << '\n';
    };
    line("lambda_sd", r.lambda_box, r.lambda_sd.size());
    line("coef_sd", r.coef_box, r.coef_sd.size());
  }
}

void write_penalty_curve_csv(std::ostream& out, const std::string& label,
                             const std::vector<PenaltyCurvePoint>& points, bool header) {
  if (header) out << "penalty,beta,value,deriv\n";
  for (const auto& pt : points)
    out << label << ',' << format_double(pt.beta) << ',' << format_double(pt.value) << ','
        << format_double(pt.deriv) << '\n';
}

void write_path_traces_csv(std::ostream& out, const std::vector<PathTrace>& traces) {
  out << "penalty,lambda,term,coefficient,bic_selected,cv_selected\n";
  for (const auto& t : traces)
    for (std::size_t k = 0; k < t.lambdas.size(); ++k)
      for (Eigen::Index j = 0; j < t.coefficients.cols(); ++j)
        out << t.label << ',' << format_double(t.lambdas[k]) << ',' << term_name(j, {}) << ','
            << format_double(t.coefficients(static_cast<Eigen::Index>(k), j)) << ','
            << (k == t.bic_index ? 1 : 0) << ',' << (k == t.cv_index ? 1 : 0) << '\n';
}

}  // namespace lamp
