#pragma once

#include <Eigen/Dense>
#include <vector>

#include "zkv/ground_state.hpp"
#include "zkv/operators.hpp"

namespace zkv {

/// Brute-force spectral summary of a discretized self-adjoint operator.
struct SpectrumSummary {
  std::vector<double> lowest_eigenvalues;  // first k, ascending
  int negative_count = 0;                  // eigenvalues below -kernel_floor
  std::vector<double> kernel_candidates;   // |eigenvalue| <= kernel_floor
  double constrained_minimum = 0.0;        // min Rayleigh quotient on {f}^perp (T only)
};

/// Discrete operators expressed in an orthonormal basis (sqrt-weight
/// similarity applied), so standard symmetric eigensolvers are valid.
struct OracleMatrices {
  Eigen::MatrixXd U;        // symmetrized U-hat, Dirichlet node dropped
  Eigen::MatrixXd T;        // U + symmetrized rank-two part
  Eigen::VectorXd f;        // kernel direction in the same coordinates, unit norm
  Eigen::VectorXd weights;  // underlying finite-volume weights (diagnostics)
};

struct OracleReport {
  SpectrumSummary u_spectrum;
  SpectrumSummary t_spectrum;
  double fstar_e_overlap = 0.0;      // |<f*, e>| / (||f*|| ||e||), e = negative eigenvector
  double identity_max_rel_err = 0.0; // worst deviation of the f-f* energy split identity
  bool identity_ok = false;
  bool agrees = false;  // one negative eigenvalue, no kernel candidate, positive constrained min
};

/// Assembles the oracle matrices on the (coarser) oracle grid from a solved
/// ground state. The ground state is restricted by exact subsampling.
OracleMatrices oracle_matrices(const GroundState& gs, GridPtr oracle_grid);

/// First k eigenvalues of a symmetric matrix (dense eigensolve). Throws
/// InvalidArgument if A is not symmetric to 1e-10 relative.
SpectrumSummary full_spectrum(const Eigen::MatrixXd& A, int k, double kernel_floor = 1e-4);

/// min { <Tv,v> : ||v|| = 1, <v,f> = 0 } via eigendecomposition of T deflated
/// to the orthogonal complement of f (Householder reduction).
double constrained_minimum(const Eigen::MatrixXd& T, const Eigen::VectorXd& f);

/// Full oracle pass: spectra of U and T, constrained minimum, the energy-split
/// identity on random constrained vectors, and the agreement verdict.
OracleReport run_oracle(const GroundState& gs, GridPtr oracle_grid, double kernel_floor = 1e-4,
                        int k = 6, int identity_samples = 50);

}  // namespace zkv
