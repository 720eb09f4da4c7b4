#pragma once

#include <memory>
#include <span>
#include <utility>

#include "zkv/grid.hpp"
#include "zkv/ground_state.hpp"

namespace zkv {

/// Normalized rank-two pair: h1 = c (Q^p)_r, h2 = c r Q with
/// c = sqrt((p-1)/<<Q,Q>>). V v = <<v,h2>> h1 + <<v,h1>> h2 on the r dr space.
struct RankTwoPair {
  double c = 0.0;
  GridFunction h1, h2;
};

/// Kernel direction of U: f = Q_r spans ker U.
struct KernelData {
  GridFunction f;
  double f_norm_sq = 0.0;  // <<f,f>>
};

/// Self-adjoint discretization of U_hat = -d_rr - (3/r) d_r + 1 - p Q^{p-1} in
/// divergence form (finite volumes in the r^3 dr measure; ghost-point Neumann
/// at r = 0, Dirichlet at r_max). The operator on the r dr space is the
/// conjugation U = r o U_hat o r^{-1}; which view applies is fixed by the
/// measure tag.
class DiscreteOperator {
public:
  enum class Measure { rdr, r3dr };

  static DiscreteOperator build(const GroundState& gs, Measure measure);

  Measure measure() const { return measure_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> potential() const { return data_->potential; }

  /// U v (measure rdr) or U_hat u (measure r3dr) depending on the tag.
  GridFunction apply(const GridFunction& v) const;

  /// Discrete weights in which the tridiagonal form is exactly self-adjoint
  /// (finite-volume cell masses of this operator's measure).
  std::span<const double> fv_weights() const { return data_->fv_weights; }

  /// Transport v(r) to the hat space, v/r with the r = 0 limit by Richardson.
  static GridFunction divide_by_r(const GridFunction& v);

  struct Coefficients {
    std::vector<double> face;       // (r_{i+1/2})^3 face conductances
    std::vector<double> potential;  // 1 - p Q^{p-1}
    std::vector<double> fv_weights;
    double h = 0.0;
  };
  const Coefficients& coefficients() const { return *data_; }

private:
  DiscreteOperator(GridPtr grid, std::shared_ptr<const Coefficients> data, Measure measure)
      : grid_(std::move(grid)), data_(std::move(data)), measure_(measure) {}

  GridPtr grid_;
  std::shared_ptr<const Coefficients> data_;
  Measure measure_;
};

struct OperatorSet {
  DiscreteOperator U;      // conjugated view on the rdr space
  DiscreteOperator hat_U;  // divergence-form view on the r3dr space
  RankTwoPair pair;
  KernelData kern;
};

/// Builds U, U_hat, the normalized pair and the kernel data from a solved
/// ground state. Throws InvalidArgument if {f, h1, h2} fails the numerical
/// linear-independence floor.
OperatorSet build_operators(const GroundState& gs);

GridFunction apply_V(const GridFunction& v, const RankTwoPair& pair);

/// Closed-form images w1 = U h1, w2 = U h2 (the r = 0 value of w1 is its
/// analytic limit, 0).
std::pair<GridFunction, GridFunction> exact_images(const GroundState& gs);

/// Projection onto the orthogonal complement of ker U: v - (<<v,f>>/<<f,f>>) f.
GridFunction project_Fperp(const GridFunction& v, const KernelData& kern);

/// Solves U h* = h_tilde with h* orthogonal to f, via the bordered
/// (kernel-deflated) linear system in the hat space. Requires <<h_tilde,f>> ~ 0.
GridFunction solve_hstar(const GridFunction& h_tilde, const DiscreteOperator& op,
                         const KernelData& kern, double residual_floor = 1e-4);

}  // namespace zkv
