#pragma once

#include <string>
#include <vector>

namespace zkv {

struct RunConfig;
struct SweepEntry;

/// Locale-independent "%.{digits}g" formatting; 12 significant digits default.
std::string fmt_sig(double x, int digits = 12);

/// "# key=value" comment lines echoing the fully resolved configuration;
/// prepended to every output file for reproducibility.
std::vector<std::string> config_header(const RunConfig& cfg);

void write_sweep_csv(const std::vector<SweepEntry>& rows, const RunConfig& cfg,
                     const std::string& path);
void write_sweep_json(const std::vector<SweepEntry>& rows, const RunConfig& cfg,
                      const std::string& path);

/// Four-column table view (p, lambda1, lambda2, det M, cos angle) rounded to
/// the published precision, for side-by-side comparison.
std::string sweep_table(const std::vector<SweepEntry>& rows);

void write_benchmark_csv(const std::string& path, const std::vector<std::string>& header,
                         const std::vector<double>& r, const std::vector<double>& computed,
                         const std::vector<double>& exact);

}  // namespace zkv
