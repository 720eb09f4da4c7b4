#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace zkv {

/// Uniform radial grid on [0, r_max] with precomputed Simpson weights for the
/// r dr and r^3 dr measures. The point count must be odd so that the interval
/// count is even.
class RadialGrid {
public:
  RadialGrid(double r_max, std::size_t n);

  double r_max() const { return r_max_; }
  std::size_t size() const { return n_; }
  double spacing() const { return h_; }
  double r(std::size_t i) const { return static_cast<double>(i) * h_; }

  /// Simpson weights folded with the measure density (w[i] ~ simpson_i * r_i^k).
  std::span<const double> weights_rdr() const { return w_rdr_; }
  std::span<const double> weights_r3dr() const { return w_r3dr_; }

  bool compatible_with(const RadialGrid& other) const;

private:
  double r_max_;
  std::size_t n_;
  double h_;
  std::vector<double> w_rdr_;
  std::vector<double> w_r3dr_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(double r_max, std::size_t n);

/// Real-valued function sampled on a RadialGrid. Values are validated to be
/// finite on construction; instances are immutable value types apart from
/// explicit in-place mutation via mutable_values().
class GridFunction {
public:
  GridFunction(GridPtr grid, std::vector<double> values);

  static GridFunction zeros(GridPtr grid);
  static GridFunction sample(GridPtr grid, const std::function<double(double)>& f);

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Simpson approximation of the 1D radial pairing  integral u(r) v(r) r dr.
double inner_rdr(const GridFunction& u, const GridFunction& v);

/// Simpson approximation of  integral u(r) v(r) r^3 dr.
double inner_r3dr(const GridFunction& u, const GridFunction& v);

/// Squared L^2(R^2) norm of a radial function: 2*pi * <<u,u>>.
double norm2d_sq(const GridFunction& u);

double norm_rdr(const GridFunction& u);

// Elementwise helpers (shared-grid checked).
GridFunction add_scaled(const GridFunction& u, double a, const GridFunction& v);  // u + a*v
GridFunction scaled(const GridFunction& u, double a);

}  // namespace zkv
