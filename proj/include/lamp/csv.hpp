#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lamp/dataset.hpp"
#include "lamp/family.hpp"
#include "lamp/path.hpp"
#include "lamp/penalty.hpp"
#include "lamp/simlab.hpp"

namespace lamp {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Parses a whole field as a double (surrounding blanks allowed).
bool parse_double(const std::string& field, double& out);

enum class ConstantColumnPolicy { error, drop };

struct IngestOptions {
  bool has_header = true;
  ConstantColumnPolicy constant_columns = ConstantColumnPolicy::error;
};

struct IngestedCsv {
  Dataset data;
  std::vector<std::string> predictors;  // names of the kept predictor columns
  std::vector<std::string> warnings;
};

/// Reads a numeric CSV. Lines starting with '#' are skipped. Without a header,
/// columns are named V1, V2, ... and `response_column` may also be a 1-based
/// index. Binary families accept {0,1} or {-1,1} responses.
IngestedCsv ingest_csv(const std::string& path, const std::string& response_column, Family family,
                       const IngestOptions& opts = {});
IngestedCsv ingest_csv(std::istream& in, const std::string& response_column, Family family,
                       const IngestOptions& opts = {});

/// Header lines "# key=value" for provenance.
using HeaderFields = std::vector<std::pair<std::string, std::string>>;
void write_header(std::ostream& out, const HeaderFields& fields);

/// Predictors and response as a CSV that ingest_csv reads back exactly.
void write_dataset_csv(std::ostream& out, const Dataset& data, const std::vector<std::string>& predictors,
                       const std::string& response_name);

/// name,coefficient rows (intercept first).
void write_coefficients_csv(std::ostream& out, const Eigen::VectorXd& theta,
                            const std::vector<std::string>& predictors);

/// lambda,term,coefficient rows, one per (lambda, coefficient).
void write_path_csv(std::ostream& out, const SolutionPath& path, const std::vector<std::string>& predictors);

/// One row per lambda: df, nll, criteria, min_eig, convex flag, iterations, error.
void write_path_summary_csv(std::ostream& out, const SolutionPath& path);

void write_cv_csv(std::ostream& out, const CvCurve& curve);

/// One row per penalty configuration.
void write_sim_report_csv(std::ostream& out, const SimReport& report);

/// Per-replication metrics, one row per (config, replication).
void write_sim_replications_csv(std::ostream& out, const SimReport& report);

/// Box-plot quantiles of the per-replication SDs.
void write_stability_csv(std::ostream& out, const StabilityReport& report);

/// label,beta,value,deriv
void write_penalty_curve_csv(std::ostream& out, const std::string& label,
                             const std::vector<PenaltyCurvePoint>& points, bool header);

/// label,lambda,term,coefficient plus selection markers.
void write_path_traces_csv(std::ostream& out, const std::vector<PathTrace>& traces);

}  // namespace lamp
