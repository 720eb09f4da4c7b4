#include "zkv/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "zkv/errors.hpp"
#include "zkv/report.hpp"

namespace zkv {

void RunConfig::validate() const {
  for (double p : p_values) {
    if (!(p > 1.0) || !(p <= 3.0)) {
      throw ConfigError("config: every p must lie in (1, 3], got " + std::to_string(p));
    }
  }
  if (!(r_max >= 15.0)) throw ConfigError("config: r_max must be >= 15");
  if (!(ode_step > 0.0) || !(ode_step <= 0.01)) throw ConfigError("config: ode_step must be in (0, 0.01]");
  if (grid_n < 3 || grid_n % 2 == 0) throw ConfigError("config: grid_n must be odd and >= 3");
  if (oracle_n < 3 || oracle_n % 2 == 0) throw ConfigError("config: oracle_n must be odd and >= 3");
}

std::vector<double> RunConfig::effective_p_values() const {
  if (!p_values.empty()) return p_values;
  std::vector<double> ps;
  for (int k = 30; k >= 11; --k) ps.push_back(static_cast<double>(k) / 10.0);
  return ps;
}

SolveConfig RunConfig::solve_config() const {
  SolveConfig sc;
  sc.r_max = r_max;
  sc.grid_n = grid_n;
  sc.oracle_n = oracle_n;
  sc.ode_step = ode_step;
  sc.method = solver;
  return sc;
}

std::vector<std::string> RunConfig::echo() const {
  std::vector<std::string> out;
  std::string plist;
  auto ps = effective_p_values();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) plist += ",";
    plist += fmt_sig(ps[i], 6);
  }
  out.push_back("p_list=" + plist);
  out.push_back("r_max=" + fmt_sig(r_max, 6));
  out.push_back("ode_step=" + fmt_sig(ode_step, 6));
  out.push_back("grid_n=" + std::to_string(grid_n));
  out.push_back("oracle_n=" + std::to_string(oracle_n));
  out.push_back("oracle=" + std::string(oracle_enabled ? "true" : "false"));
  out.push_back("revalidate_near_floor=" + std::string(revalidate_near_floor ? "true" : "false"));
  out.push_back("solver=" + to_string(solver));
  out.push_back("format=" + to_string(format));
  out.push_back("tol.sign_floor=" + fmt_sig(tol.sign_floor, 6));
  out.push_back("tol.near_floor_lambda=" + fmt_sig(tol.near_floor_lambda, 6));
  out.push_back("tol.near_floor_det=" + fmt_sig(tol.near_floor_det, 6));
  out.push_back("tol.benchmark_floor=" + fmt_sig(tol.benchmark_floor, 6));
  out.push_back("tol.fstar_residual=" + fmt_sig(tol.fstar_residual, 6));
  out.push_back("tol.hstar_residual=" + fmt_sig(tol.hstar_residual, 6));
  out.push_back("tol.kernel_floor=" + fmt_sig(tol.kernel_floor, 6));
  return out;
}

std::vector<double> parse_p_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      double v = std::stod(item, &pos);
      if (pos != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("config: bad p value '" + item + "'");
    }
  }
  return out;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": '" + value + "'");
  }
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(value, &pos);
    if (pos != value.size() || v <= 0) throw std::invalid_argument(value);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config: bad boolean value for " + key + ": '" + value + "'");
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "p_list") {
    cfg.p_values = parse_p_list(value);
  } else if (key == "p") {
    cfg.p_values = {parse_double(key, value)};
  } else if (key == "r_max") {
    cfg.r_max = parse_double(key, value);
  } else if (key == "ode_step") {
    cfg.ode_step = parse_double(key, value);
  } else if (key == "grid_n") {
    cfg.grid_n = parse_size(key, value);
  } else if (key == "oracle_n") {
    cfg.oracle_n = parse_size(key, value);
  } else if (key == "oracle") {
    cfg.oracle_enabled = parse_bool(key, value);
  } else if (key == "revalidate_near_floor") {
    cfg.revalidate_near_floor = parse_bool(key, value);
  } else if (key == "out_dir") {
    cfg.out_dir = value;
  } else if (key == "solver") {
    if (value == "shooting") {
      cfg.solver = SolverMethod::shooting;
    } else if (value == "newton") {
      cfg.solver = SolverMethod::newton;
    } else {
      throw ConfigError("config: solver must be 'shooting' or 'newton'");
    }
  } else if (key == "format") {
    if (value == "csv") {
      cfg.format = OutputFormat::csv;
    } else if (value == "json") {
      cfg.format = OutputFormat::json;
    } else if (value == "table") {
      cfg.format = OutputFormat::table;
    } else {
      throw ConfigError("config: format must be csv, json or table");
    }
  } else if (key == "tol.sign_floor") {
    cfg.tol.sign_floor = parse_double(key, value);
  } else if (key == "tol.near_floor_lambda") {
    cfg.tol.near_floor_lambda = parse_double(key, value);
  } else if (key == "tol.near_floor_det") {
    cfg.tol.near_floor_det = parse_double(key, value);
  } else if (key == "tol.benchmark_floor") {
    cfg.tol.benchmark_floor = parse_double(key, value);
  } else if (key == "tol.fstar_residual") {
    cfg.tol.fstar_residual = parse_double(key, value);
  } else if (key == "tol.hstar_residual") {
    cfg.tol.hstar_residual = parse_double(key, value);
  } else if (key == "tol.kernel_floor") {
    cfg.tol.kernel_floor = parse_double(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      s = (a == std::string::npos) ? std::string() : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(value);
    apply_override(base, key, value);
  }
  return base;
}

std::string to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::table: return "table";
  }
  return "?";
}

std::string to_string(SolverMethod m) {
  return m == SolverMethod::shooting ? "shooting" : "newton";
}

}  // namespace zkv
