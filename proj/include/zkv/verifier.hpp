#pragma once

#include <array>
#include <optional>
#include <string>

#include "zkv/config.hpp"
#include "zkv/grid.hpp"
#include "zkv/ground_state.hpp"
#include "zkv/operators.hpp"
#include "zkv/oracle.hpp"

namespace zkv {

/// 2x2 quadratic form of V on the basis {h1, h2}: B_ij = <<V h_i, h_j>>.
/// One negative and one positive eigenvalue <=> ind V = 1.
struct IndexMatrixB {
  std::array<std::array<double, 2>, 2> entries{};
  std::array<double, 2> eigenvalues{};  // ascending
};

/// 3x3 pairing matrix whose non-singularity is equivalent to ker(U+V) = 0 and
/// whose linear system produces f*.
struct MatrixM {
  std::array<std::array<double, 3>, 3> entries{};
  double det = 0.0;
  double min_singular_value = 0.0;
};

struct FstarCoefficients {
  double beta = 0.0, gamma1 = 0.0, gamma2 = 0.0;
};

struct SpectralChecks {
  bool ind_V_is_1 = false;
  bool M_nonsingular = false;
  bool pairing_negative = false;
};

/// Per-p verdict for the three checks: ind V = 1, M non-singular, <<f,f*>> < 0.
struct SpectralReport {
  double p = 0.0;
  IndexMatrixB B;
  MatrixM M;
  FstarCoefficients coefficients;
  GridFunction fstar;
  double cos_angle = 0.0;  // <<f,f*>> / (||f|| ||f*||)
  double fstar_residual = 0.0;
  SpectralChecks checks;
  bool verdict = false;
  bool revalidated = false;         // near-floor values re-confirmed at doubled grid n
  bool revalidation_stable = true;  // signs unchanged under the refinement
  std::optional<OracleReport> oracle;
};

struct SweepEntry {
  double p = 0.0;
  std::optional<SpectralReport> report;
  std::string error;  // non-empty when the pipeline failed for this p
};

IndexMatrixB build_index_matrix(const RankTwoPair& pair);

/// True iff lambda1 < 0 < lambda2. Eigenvalues inside the scaled sign floor
/// raise IndeterminateSign instead of returning a silent boolean.
bool check_index_V(const IndexMatrixB& B, double sign_floor = 1e-14);

struct HstarData {
  GridFunction h_tilde1, h_tilde2;
  GridFunction hstar1, hstar2;
};

HstarData build_hstars(const OperatorSet& ops, const Tolerances& tol);

MatrixM build_matrix_M(const OperatorSet& ops, const HstarData& hs);

/// Solves M (beta, gamma1, gamma2)^T = (<<f,f>>, 0, 0)^T and assembles
/// f* = beta f + gamma1 h1* + gamma2 h2*; verifies ||(U+V) f* - f||/||f||.
std::pair<FstarCoefficients, GridFunction> solve_fstar(const MatrixM& M, const OperatorSet& ops,
                                                       const HstarData& hs,
                                                       const Tolerances& tol,
                                                       double* residual_out = nullptr);

std::pair<double, bool> pairing_sign(const GridFunction& fstar, const KernelData& kern,
                                     double sign_floor = 1e-14);

/// Full pipeline for one nonlinearity power: ground state -> operators ->
/// B, M, f*, angle -> verdict (with near-floor revalidation at doubled grid n).
SpectralReport verify(double p, const RunConfig& config);

/// Reports in input order; per-p failures are recorded in-row.
std::vector<SweepEntry> sweep(const std::vector<double>& p_values, const RunConfig& config);

}  // namespace zkv
