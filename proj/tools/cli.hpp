#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lamp/csv.hpp"
#include "lamp/family.hpp"
#include "lamp/path.hpp"
#include "lamp/penalty.hpp"
#include "lamp/simlab.hpp"
#include "lamp/solver.hpp"

namespace lamp::cli {

enum ExitCode : int { exit_ok = 0, exit_internal = 1, exit_config = 2, exit_data = 3, exit_numerical = 4 };

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "LAMP_OUTPUT_DIR";

using KeyValues = std::map<std::string, std::string>;

/// Every key accepted in a config file or as a --flag.
const std::vector<std::string>& known_keys();

/// Parses "key = value" lines ('#' comments allowed). Malformed lines and
/// unknown keys are all reported in one ConfigError.
KeyValues parse_config(std::istream& in, const std::string& origin = "config");
KeyValues read_config_file(const std::string& path);

struct RunConfig {
  std::string command;
  Family family{FamilyKind::gaussian};
  PenaltySpec penalty;
  std::optional<double> lambda;
  SolverConfig solver;
  int n_lambda = 100;
  std::optional<double> ratio;
  Criterion criterion = Criterion::bic();
  std::uint64_t seed = 20240101;
  std::string input;
  std::string response = "y";
  IngestOptions ingest;
  std::string output_dir;
  int threads = 1;
  std::optional<Eigen::Index> max_df;
  bool diagnostics = true;
  std::vector<double> lambda0_ladder;
  int folds = 10;

  // simulate / stability / traces
  SimDesign design;
  std::vector<PenaltyConfig> penalties;
  double perturb_sd = 0.0;
  int cv_repeats = 100;
  bool mrme = true;
  int rep = 0;

  // penalty-curve
  std::vector<PenaltyConfig> curves;
  double beta_max = 3.0;
  int points = 301;

  // Effective value of every key (defaults included), echoed into outputs.
  KeyValues resolved;
};

/// Builds a RunConfig for `command`; throws ConfigError listing every
/// violation at once.
RunConfig resolve(const std::string& command, const KeyValues& values);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lamp::cli
