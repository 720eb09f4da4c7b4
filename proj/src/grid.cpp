#include "zkv/grid.hpp"

#include <cmath>

#include "zkv/errors.hpp"

namespace zkv {

RadialGrid::RadialGrid(double r_max, std::size_t n) : r_max_(r_max), n_(n) {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw InvalidArgument("RadialGrid: r_max must be positive and finite");
  }
  if (n < 3 || n % 2 == 0) {
    throw InvalidArgument("RadialGrid: n must be odd and >= 3 (Simpson needs an even interval count)");
  }
  h_ = r_max / static_cast<double>(n - 1);

  // Composite Simpson: h/3 * (1, 4, 2, 4, ..., 2, 4, 1), folded with the
  // measure density so pairings reduce to plain weighted dot products.
  w_rdr_.resize(n_);
  w_r3dr_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = (i == 0 || i + 1 == n_) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    double w = s * h_ / 3.0;
    double ri = r(i);
    w_rdr_[i] = w * ri;
    w_r3dr_[i] = w * ri * ri * ri;
  }
}

bool RadialGrid::compatible_with(const RadialGrid& other) const {
  return this == &other || (n_ == other.n_ && r_max_ == other.r_max_);
}

GridPtr make_grid(double r_max, std::size_t n) {
  return std::make_shared<const RadialGrid>(r_max, n);
}

GridFunction::GridFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InvalidArgument("GridFunction: null grid");
  if (values_.size() != grid_->size()) {
    throw InvalidArgument("GridFunction: value count does not match grid size");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidArgument("GridFunction: non-finite value");
  }
}

GridFunction GridFunction::zeros(GridPtr grid) {
  std::vector<double> v(grid->size(), 0.0);
  return GridFunction(std::move(grid), std::move(v));
}

GridFunction GridFunction::sample(GridPtr grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->r(i));
  return GridFunction(std::move(grid), std::move(v));
}

namespace {

void require_shared_grid(const GridFunction& u, const GridFunction& v, const char* op) {
  if (!u.grid().compatible_with(v.grid())) {
    throw InvalidArgument(std::string(op) + ": operands live on different grids");
  }
}

// Kahan-compensated weighted dot product; the pairings feed sign decisions
// that cancel to ~1e-6 of the summand scale, so the cheap compensation is
// worth it.
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double term = w[i] * a[i] * b[i] - comp;
    double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum;
}

}  // namespace

double inner_rdr(const GridFunction& u, const GridFunction& v) {
  require_shared_grid(u, v, "inner_rdr");
  return weighted_dot(u.grid().weights_rdr(), u.values(), v.values());
}

double inner_r3dr(const GridFunction& u, const GridFunction& v) {
  require_shared_grid(u, v, "inner_r3dr");
  return weighted_dot(u.grid().weights_r3dr(), u.values(), v.values());
}

double norm2d_sq(const GridFunction& u) { return 2.0 * M_PI * inner_rdr(u, u); }

double norm_rdr(const GridFunction& u) { return std::sqrt(inner_rdr(u, u)); }

GridFunction add_scaled(const GridFunction& u, double a, const GridFunction& v) {
  require_shared_grid(u, v, "add_scaled");
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] + a * v[i];
  return GridFunction(u.grid_ptr(), std::move(out));
}

GridFunction scaled(const GridFunction& u, double a) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * u[i];
  return GridFunction(u.grid_ptr(), std::move(out));
}

}  // namespace zkv
