#include "zkv/report.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "zkv/config.hpp"
#include "zkv/errors.hpp"
#include "zkv/verifier.hpp"

namespace zkv {

std::string fmt_sig(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

std::vector<std::string> config_header(const RunConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& line : cfg.echo()) out.push_back("# " + line);
  return out;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("report: cannot open " + path);
  return out;
}

}  // namespace

void write_sweep_csv(const std::vector<SweepEntry>& rows, const RunConfig& cfg,
                     const std::string& path) {
  auto out = open_out(path);
  for (const auto& line : config_header(cfg)) out << line << "\n";
  out << "p,lambda1,lambda2,detM,cos_angle,verdict\n";
  for (const auto& row : rows) {
    out << fmt_sig(row.p);
    if (row.report) {
      const auto& rep = *row.report;
      out << "," << fmt_sig(rep.B.eigenvalues[0]) << "," << fmt_sig(rep.B.eigenvalues[1]) << ","
          << fmt_sig(rep.M.det) << "," << fmt_sig(rep.cos_angle) << ","
          << (rep.verdict ? "true" : "false") << "\n";
    } else {
      out << ",nan,nan,nan,nan,error\n";
    }
  }
}

namespace {

nlohmann::json spectrum_json(const SpectrumSummary& s) {
  nlohmann::json j;
  j["lowest_eigenvalues"] = s.lowest_eigenvalues;
  j["negative_count"] = s.negative_count;
  j["kernel_candidates"] = s.kernel_candidates;
  if (std::isfinite(s.constrained_minimum)) j["constrained_minimum"] = s.constrained_minimum;
  return j;
}

nlohmann::json report_json(const SpectralReport& rep) {
  nlohmann::json j;
  j["p"] = rep.p;
  j["B"] = {{rep.B.entries[0][0], rep.B.entries[0][1]},
            {rep.B.entries[1][0], rep.B.entries[1][1]}};
  j["lambda1"] = rep.B.eigenvalues[0];
  j["lambda2"] = rep.B.eigenvalues[1];
  j["M"] = {{rep.M.entries[0][0], rep.M.entries[0][1], rep.M.entries[0][2]},
            {rep.M.entries[1][0], rep.M.entries[1][1], rep.M.entries[1][2]},
            {rep.M.entries[2][0], rep.M.entries[2][1], rep.M.entries[2][2]}};
  j["detM"] = rep.M.det;
  j["min_singular_value"] = rep.M.min_singular_value;
  j["beta"] = rep.coefficients.beta;
  j["gamma1"] = rep.coefficients.gamma1;
  j["gamma2"] = rep.coefficients.gamma2;
  j["cos_angle"] = rep.cos_angle;
  j["fstar_residual"] = rep.fstar_residual;
  j["checks"] = {{"ind_V_is_1", rep.checks.ind_V_is_1},
                 {"M_nonsingular", rep.checks.M_nonsingular},
                 {"pairing_negative", rep.checks.pairing_negative}};
  j["verdict"] = rep.verdict;
  j["revalidated"] = rep.revalidated;
  j["revalidation_stable"] = rep.revalidation_stable;
  if (rep.oracle) {
    nlohmann::json jo;
    jo["U"] = spectrum_json(rep.oracle->u_spectrum);
    jo["T"] = spectrum_json(rep.oracle->t_spectrum);
    jo["fstar_e_overlap"] = rep.oracle->fstar_e_overlap;
    jo["identity_max_rel_err"] = rep.oracle->identity_max_rel_err;
    jo["identity_ok"] = rep.oracle->identity_ok;
    jo["agrees"] = rep.oracle->agrees;
    j["oracle"] = jo;
  }
  return j;
}

}  // namespace

void write_sweep_json(const std::vector<SweepEntry>& rows, const RunConfig& cfg,
                      const std::string& path) {
  nlohmann::json j;
  nlohmann::json jc;
  for (const auto& line : cfg.echo()) {
    auto eq = line.find('=');
    jc[line.substr(0, eq)] = line.substr(eq + 1);
  }
  j["config"] = jc;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rows) {
    if (row.report) {
      j["rows"].push_back(report_json(*row.report));
    } else {
      j["rows"].push_back({{"p", row.p}, {"error", row.error}});
    }
  }
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::string sweep_table(const std::vector<SweepEntry>& rows) {
  std::string s;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%5s  %12s  %12s  %12s  %12s  %s\n", "p", "lambda1", "lambda2",
                "detM", "cos(f,f*)", "verdict");
  s += buf;
  for (const auto& row : rows) {
    if (row.report) {
      const auto& rep = *row.report;
      std::snprintf(buf, sizeof(buf), "%5.2f  %12.5g  %12.5g  %12.5g  %12.7g  %s\n", row.p,
                    rep.B.eigenvalues[0], rep.B.eigenvalues[1], rep.M.det, rep.cos_angle,
                    rep.verdict ? "pass" : "FAIL");
    } else {
      std::snprintf(buf, sizeof(buf), "%5.2f  error: %s\n", row.p, row.error.c_str());
    }
    s += buf;
  }
  return s;
}

void write_benchmark_csv(const std::string& path, const std::vector<std::string>& header,
                         const std::vector<double>& r, const std::vector<double>& computed,
                         const std::vector<double>& exact) {
  auto out = open_out(path);
  for (const auto& line : header) out << line << "\n";
  out << "r,computed,exact\n";
  for (std::size_t i = 0; i < r.size(); ++i) {
    out << fmt_sig(r[i]) << "," << fmt_sig(computed[i]) << "," << fmt_sig(exact[i]) << "\n";
  }
}

}  // namespace zkv
