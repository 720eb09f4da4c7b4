#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>

#include "zkv/grid.hpp"

namespace zkv {

enum class SolverMethod { shooting, newton };

struct SolveConfig {
  double r_max = 25.0;
  std::size_t grid_n = 4001;    // operator grid (odd)
  std::size_t oracle_n = 1201;  // coarser grid the fine lattice must also hit exactly
  double ode_step = 1e-3;       // upper bound on the fine lattice step
  double taylor_radius = 0.01;  // switch from the series start to RK4
  double amplitude_lo = 0.1;    // initial shooting bracket, expanded upward on demand
  double amplitude_hi = 10.0;
  double bracket_rel_tol = 1e-12;  // required final bracket width (bisection runs to stagnation)
  SolverMethod method = SolverMethod::shooting;

  /// Actual fine lattice step: r_max / (lcm(grid_n-1, oracle_n-1) * m), the
  /// largest such step not exceeding ~ode_step. Both grids subsample it exactly.
  double fine_step() const;
  std::size_t fine_count() const;  // lattice intervals on [0, r_max]
};

struct SolverMeta {
  SolverMethod method = SolverMethod::shooting;
  int bisect_iterations = 0;
  double bracket_lo = 0.0;   // classified undershoot
  double bracket_hi = 0.0;   // classified overshoot
  double bracket_width_rel = 0.0;
  double r_bend = 0.0;       // radius where the outward trajectory left the decaying regime
  double r_match = 0.0;      // seam between the outward and inward solutions
  double boundary_value = 0.0;  // Q(r_max) found by the inward match
  int tail_iterations = 0;
  double match_mismatch_qr = 0.0;  // relative Q_r jump across the seam
  int newton_iterations = 0;
};

/// ODE-resolution samples of (Q, Q_r) on the uniform fine lattice; the operator
/// and oracle grids read it by exact index stride.
class FineProfile {
public:
  FineProfile(double r_max, double h, std::vector<double> q, std::vector<double> qr);

  double r_max() const { return r_max_; }
  double h() const { return h_; }
  std::size_t size() const { return q_.size(); }
  std::span<const double> q() const { return q_; }
  std::span<const double> qr() const { return qr_; }

  /// Index stride for a grid whose spacing is an exact multiple of h().
  /// Throws InvalidArgument on misalignment.
  std::size_t stride_for(const RadialGrid& grid) const;

private:
  double r_max_;
  double h_;
  std::vector<double> q_, qr_;
};

/// Solved ground-state profile Q (positive, radially decreasing) for a given
/// nonlinearity power p, sampled on an operator grid together with Q_r.
class GroundState {
public:
  GroundState(double p, GridPtr grid, std::shared_ptr<const FineProfile> fine, SolverMeta meta);

  double p() const { return p_; }
  double amplitude() const { return q_[0]; }
  const GridFunction& q() const { return q_; }
  const GridFunction& qr() const { return qr_; }
  const GridPtr& grid_ptr() const { return q_.grid_ptr(); }
  const RadialGrid& grid() const { return q_.grid(); }
  const SolverMeta& meta() const { return meta_; }
  const FineProfile& fine() const { return *fine_; }

  /// Same solution restricted to another exactly-aligned grid (e.g. the oracle grid).
  GroundState restricted_to(GridPtr grid) const;

private:
  double p_;
  GridFunction q_, qr_;
  std::shared_ptr<const FineProfile> fine_;
  SolverMeta meta_;
};

struct IdentityReport {
  double p = 0.0;
  double grad_norm_sq = 0.0;  // |grad Q|^2 over R^2
  double mass = 0.0;          // |Q|^2 over R^2
  double lp_norm = 0.0;       // |Q|^{p+1}_{L^{p+1}}
  double lambda_pair = 0.0;   // <Lambda Q, Q>
  double residual_p1 = 0.0;   // grad_norm_sq - (p-1)/2 * mass
  double residual_p2 = 0.0;   // lp_norm - (p+1)/2 * mass
  double residual_lambda = 0.0;
};

/// 4th-order series start for Q'' + Q'/r - Q + Q^p = 0 with Q(0) = amplitude,
/// Q'(0) = 0. Returns (Q(r), Q_r(r)).
std::pair<double, double> taylor_start(double amplitude, double p, double r);

GroundState solve_ground_state(double p, const SolveConfig& config = {});

/// Scaling generator (2/(p-1)) Q + r Q_r on the state's grid.
GridFunction lambda_q(const GroundState& gs);

IdentityReport pokhozhaev_report(const GroundState& gs);

/// CSV export of (r, Q, Q_r); header_lines are emitted verbatim first.
void write_profile_csv(const GroundState& gs, const std::string& path,
                       std::span<const std::string> header_lines);

}  // namespace zkv
