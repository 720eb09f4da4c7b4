#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "zkv/ground_state.hpp"

namespace zkv {

enum class OutputFormat { csv, json, table };

/// Named numerical floors; every sign decision and acceptance bound reads from
/// here so an output header captures the complete state.
struct Tolerances {
  double sign_floor = 1e-14;        // scaled by the quantity's natural magnitude
  double near_floor_lambda = 1e-6;  // |lambda2| below this triggers doubled-grid revalidation
  double near_floor_det = 1e-6;     // |det M| below this triggers doubled-grid revalidation
  double benchmark_floor = 1e-3;    // relative L2(rdr) deviation allowed in benchmarks
  double fstar_residual = 1e-3;     // ||(U+V) f* - f|| / ||f||
  double hstar_residual = 1e-4;     // ||U h* - h_tilde|| / ||h_tilde||
  double kernel_floor = 1e-4;       // oracle: |eigenvalue| below this is a kernel candidate
};

struct RunConfig {
  std::vector<double> p_values;  // empty => the default 3.0 .. 1.1 sweep
  double r_max = 25.0;
  double ode_step = 1e-3;
  std::size_t grid_n = 4001;
  std::size_t oracle_n = 1201;
  bool oracle_enabled = false;
  bool revalidate_near_floor = true;
  SolverMethod solver = SolverMethod::shooting;
  std::string out_dir = ".";
  OutputFormat format = OutputFormat::csv;
  Tolerances tol;

  /// Throws ConfigError unless every invariant holds (p in (1,3], r_max >= 15,
  /// ode_step <= 0.01, grid_n odd, ...).
  void validate() const;

  std::vector<double> effective_p_values() const;
  SolveConfig solve_config() const;

  /// Key=value lines describing the fully resolved configuration.
  std::vector<std::string> echo() const;
};

/// Parses a plain key=value config file (one pair per line, '#' comments).
/// Unknown keys are a ConfigError.
RunConfig load_config_file(const std::string& path, RunConfig base = {});

/// Applies "key=value" overrides on top of a config (same keys as the file).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

std::vector<double> parse_p_list(const std::string& text);

std::string to_string(OutputFormat f);
std::string to_string(SolverMethod m);

}  // namespace zkv
