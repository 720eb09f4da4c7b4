#include "zkv/verifier.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "zkv/errors.hpp"

namespace zkv {

namespace {

// Rethrows stage failures with a stage label, preserving the exception type.
template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(std::string(name) + ": " + e.what());
  } catch (const SolverFailure& e) {
    throw SolverFailure(std::string(name) + ": " + e.what());
  } catch (const PostconditionError& e) {
    throw PostconditionError(std::string(name) + ": " + e.what());
  } catch (const IndeterminateSign& e) {
    throw IndeterminateSign(std::string(name) + ": " + e.what());
  }
}

Eigen::Matrix3d to_eigen(const MatrixM& M) {
  Eigen::Matrix3d A;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) A(i, j) = M.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return A;
}

}  // namespace

IndexMatrixB build_index_matrix(const RankTwoPair& pair) {
  GridFunction vh1 = apply_V(pair.h1, pair);
  GridFunction vh2 = apply_V(pair.h2, pair);
  IndexMatrixB B;
  B.entries[0][0] = inner_rdr(vh1, pair.h1);
  B.entries[0][1] = inner_rdr(vh2, pair.h1);
  B.entries[1][0] = inner_rdr(vh1, pair.h2);
  B.entries[1][1] = inner_rdr(vh2, pair.h2);
  double tr = B.entries[0][0] + B.entries[1][1];
  double off = 0.5 * (B.entries[0][1] + B.entries[1][0]);
  double disc = std::hypot(B.entries[0][0] - B.entries[1][1], 2.0 * off);
  B.eigenvalues = {0.5 * (tr - disc), 0.5 * (tr + disc)};
  return B;
}

bool check_index_V(const IndexMatrixB& B, double sign_floor) {
  double scale = std::max(std::abs(B.eigenvalues[0]), std::abs(B.eigenvalues[1]));
  double floor = sign_floor * scale;
  for (double lam : B.eigenvalues) {
    if (std::abs(lam) <= floor) {
      throw IndeterminateSign("check_index_V: eigenvalue " + std::to_string(lam) +
                              " inside the sign-resolution floor");
    }
  }
  return B.eigenvalues[0] < 0.0 && B.eigenvalues[1] > 0.0;
}

HstarData build_hstars(const OperatorSet& ops, const Tolerances& tol) {
  GridFunction h_tilde1 = project_Fperp(ops.pair.h1, ops.kern);
  GridFunction h_tilde2 = project_Fperp(ops.pair.h2, ops.kern);
  GridFunction hstar1 = solve_hstar(h_tilde1, ops.U, ops.kern, tol.hstar_residual);
  GridFunction hstar2 = solve_hstar(h_tilde2, ops.U, ops.kern, tol.hstar_residual);
  return HstarData{std::move(h_tilde1), std::move(h_tilde2), std::move(hstar1), std::move(hstar2)};
}

MatrixM build_matrix_M(const OperatorSet& ops, const HstarData& hs) {
  const GridFunction& f = ops.kern.f;
  GridFunction vf = apply_V(f, ops.pair);
  GridFunction y1 = add_scaled(hs.h_tilde1, 1.0, apply_V(hs.hstar1, ops.pair));
  GridFunction y2 = add_scaled(hs.h_tilde2, 1.0, apply_V(hs.hstar2, ops.pair));

  MatrixM M;
  const GridFunction* cols[3] = {&vf, &y1, &y2};
  const GridFunction* rows[3] = {&f, &hs.h_tilde1, &hs.h_tilde2};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      M.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          inner_rdr(*cols[j], *rows[i]);
    }
  }

  const auto& e = M.entries;
  M.det = e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1]) -
          e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0]) +
          e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]);

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(to_eigen(M));
  M.min_singular_value = svd.singularValues()(2);
  double sv_product = svd.singularValues()(0) * svd.singularValues()(1) * svd.singularValues()(2);
  double mismatch = std::abs(std::abs(M.det) - sv_product);
  if (mismatch > 1e-8 * std::max({std::abs(M.det), sv_product, 1e-300})) {
    throw PostconditionError("build_matrix_M: closed-form det and singular-value product disagree");
  }
  return M;
}

std::pair<FstarCoefficients, GridFunction> solve_fstar(const MatrixM& M, const OperatorSet& ops,
                                                       const HstarData& hs, const Tolerances& tol,
                                                       double* residual_out) {
  Eigen::Matrix3d A = to_eigen(M);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(A);
  if (!(M.min_singular_value > tol.sign_floor * svd.singularValues()(0))) {
    throw InvalidArgument("solve_fstar: M is singular at the configured floor");
  }
  Eigen::Vector3d rhs(ops.kern.f_norm_sq, 0.0, 0.0);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
  Eigen::Vector3d x = lu.solve(rhs);
  x += lu.solve(rhs - A * x);  // one refinement step

  FstarCoefficients coeff{x(0), x(1), x(2)};
  GridFunction fstar = scaled(ops.kern.f, coeff.beta);
  fstar = add_scaled(fstar, coeff.gamma1, hs.hstar1);
  fstar = add_scaled(fstar, coeff.gamma2, hs.hstar2);

  // residual of (U+V) f* = f in the rdr norm
  GridFunction image = ops.U.apply(fstar);
  image = add_scaled(image, 1.0, apply_V(fstar, ops.pair));
  GridFunction diff = add_scaled(image, -1.0, ops.kern.f);
  double rel = norm_rdr(diff) / std::sqrt(ops.kern.f_norm_sq);
  if (residual_out) *residual_out = rel;
  bool homogeneous = rhs.norm() == 0.0;
  if (!homogeneous && !(rel < tol.fstar_residual)) {
    throw PostconditionError("solve_fstar: operator residual " + std::to_string(rel) +
                             " above floor " + std::to_string(tol.fstar_residual));
  }
  return {coeff, std::move(fstar)};
}

std::pair<double, bool> pairing_sign(const GridFunction& fstar, const KernelData& kern,
                                     double sign_floor) {
  double fstar_norm = norm_rdr(fstar);
  if (!(fstar_norm > 0.0)) throw InvalidArgument("pairing_sign: f* vanishes");
  double cosv = inner_rdr(kern.f, fstar) / (std::sqrt(kern.f_norm_sq) * fstar_norm);
  return {cosv, cosv < -sign_floor};
}

SpectralReport verify(double p, const RunConfig& config) {
  if (!(p > 1.0) || !(p > 1.0 && p <= 3.0)) {
    throw InvalidArgument("verify: p must lie in (1, 3]");
  }
  GroundState gs = stage("ground_state", [&] { return solve_ground_state(p, config.solve_config()); });
  OperatorSet ops = stage("operators", [&] { return build_operators(gs); });
  HstarData hs = stage("hstar", [&] { return build_hstars(ops, config.tol); });

  SpectralReport rep{.p = p,
                     .B = {},
                     .M = {},
                     .coefficients = {},
                     .fstar = GridFunction::zeros(gs.grid_ptr()),
                     .cos_angle = 0.0};
  rep.B = stage("index_matrix", [&] { return build_index_matrix(ops.pair); });
  rep.M = stage("matrix_M", [&] { return build_matrix_M(ops, hs); });
  rep.checks.ind_V_is_1 = stage("check_index_V", [&] { return check_index_V(rep.B, config.tol.sign_floor); });

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(to_eigen(rep.M));
  rep.checks.M_nonsingular = rep.M.min_singular_value > config.tol.sign_floor * svd.singularValues()(0);

  if (rep.checks.M_nonsingular) {
    auto [coeff, fstar] = stage("fstar", [&] {
      return solve_fstar(rep.M, ops, hs, config.tol, nullptr);
    });
    rep.coefficients = coeff;
    double residual = 0.0;
    {
      GridFunction image = ops.U.apply(fstar);
      image = add_scaled(image, 1.0, apply_V(fstar, ops.pair));
      GridFunction diff = add_scaled(image, -1.0, ops.kern.f);
      residual = norm_rdr(diff) / std::sqrt(ops.kern.f_norm_sq);
    }
    rep.fstar_residual = residual;
    rep.fstar = std::move(fstar);
    auto [cosv, negative] = stage("pairing", [&] {
      return pairing_sign(rep.fstar, ops.kern, config.tol.sign_floor);
    });
    rep.cos_angle = cosv;
    rep.checks.pairing_negative = negative;
  }

  rep.verdict = rep.checks.ind_V_is_1 && rep.checks.M_nonsingular && rep.checks.pairing_negative;

  // Near-floor quantities are re-confirmed at doubled resolution before the
  // verdict stands; a sign flip under refinement voids it.
  bool near_floor = std::abs(rep.B.eigenvalues[1]) < config.tol.near_floor_lambda ||
                    std::abs(rep.M.det) < config.tol.near_floor_det;
  if (config.revalidate_near_floor && near_floor) {
    RunConfig refined = config;
    refined.grid_n = 2 * config.grid_n - 1;
    refined.revalidate_near_floor = false;
    refined.oracle_enabled = false;
    SpectralReport rep2 = stage("revalidation", [&] { return verify(p, refined); });
    auto same_sign = [](double a, double b) { return (a < 0.0) == (b < 0.0); };
    rep.revalidated = true;
    rep.revalidation_stable = same_sign(rep.B.eigenvalues[0], rep2.B.eigenvalues[0]) &&
                              same_sign(rep.B.eigenvalues[1], rep2.B.eigenvalues[1]) &&
                              same_sign(rep.M.det, rep2.M.det) &&
                              same_sign(rep.cos_angle, rep2.cos_angle);
    rep.verdict = rep.verdict && rep.revalidation_stable;
  }

  if (config.oracle_enabled) {
    rep.oracle = stage("oracle", [&] {
      return run_oracle(gs, make_grid(config.r_max, config.oracle_n), config.tol.kernel_floor);
    });
  }
  return rep;
}

std::vector<SweepEntry> sweep(const std::vector<double>& p_values, const RunConfig& config) {
  std::vector<SweepEntry> rows;
  rows.reserve(p_values.size());
  for (double p : p_values) {
    SweepEntry entry;
    entry.p = p;
    try {
      entry.report = verify(p, config);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    rows.push_back(std::move(entry));
  }
  return rows;
}

}  // namespace zkv
