#include "zkv/operators.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>

#include "zkv/errors.hpp"

namespace zkv {

namespace {

// |Q|^e via exp(e ln Q); Q is positive on the profiles this is used with.
inline double pos_pow(double q, double e) {
  if (q <= 0.0) return 0.0;
  return std::exp(e * std::log(q));
}

}  // namespace

GridFunction DiscreteOperator::divide_by_r(const GridFunction& v) {
  const auto& g = v.grid();
  std::vector<double> out(v.size());
  for (std::size_t i = 1; i < v.size(); ++i) out[i] = v[i] / g.r(i);
  // Richardson limit of v/r at r = 0 for v vanishing linearly there.
  out[0] = (v.size() > 2) ? (4.0 * out[1] - out[2]) / 3.0 : out[1];
  return GridFunction(v.grid_ptr(), std::move(out));
}

DiscreteOperator DiscreteOperator::build(const GroundState& gs, Measure measure) {
  const auto& g = gs.grid();
  auto data = std::make_shared<Coefficients>();
  data->h = g.spacing();
  std::size_t n = g.size();
  data->face.resize(n);  // face[i] = (r_i + h/2)^3
  data->potential.resize(n);
  data->fv_weights.resize(n);
  double h = data->h;
  for (std::size_t i = 0; i < n; ++i) {
    double rf = g.r(i) + 0.5 * h;
    data->face[i] = rf * rf * rf;
    data->potential[i] = 1.0 - gs.p() * pos_pow(gs.q()[i], gs.p() - 1.0);
    double ri = g.r(i);
    data->fv_weights[i] = (i == 0) ? h * h * h * h / 64.0 : ri * ri * ri * h;
  }
  return DiscreteOperator(gs.grid_ptr(), std::move(data), measure);
}

GridFunction DiscreteOperator::apply(const GridFunction& v) const {
  if (!v.grid().compatible_with(*grid_)) {
    throw InvalidArgument("DiscreteOperator::apply: grid mismatch");
  }
  const auto& c = *data_;
  const double h = c.h;
  std::size_t n = v.size();

  auto apply_hat = [&](std::span<const double> u, std::vector<double>& out) {
    out[0] = 8.0 * (u[0] - u[1]) / (h * h) + c.potential[0] * u[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      double ri = grid_->r(i);
      double al = c.face[i - 1];  // (r_i - h/2)^3
      double ar = c.face[i];
      out[i] = (-al * u[i - 1] + (al + ar) * u[i] - ar * u[i + 1]) / (h * h * ri * ri * ri) +
               c.potential[i] * u[i];
    }
    out[n - 1] = 0.0;  // Dirichlet row
  };

  std::vector<double> out(n);
  if (measure_ == Measure::r3dr) {
    apply_hat(v.values(), out);
    return GridFunction(v.grid_ptr(), std::move(out));
  }
  GridFunction u = divide_by_r(v);
  apply_hat(u.values(), out);
  for (std::size_t i = 0; i < n; ++i) out[i] *= grid_->r(i);
  return GridFunction(v.grid_ptr(), std::move(out));
}

OperatorSet build_operators(const GroundState& gs) {
  double qq = inner_rdr(gs.q(), gs.q());
  double c = std::sqrt((gs.p() - 1.0) / qq);

  std::size_t n = gs.grid().size();
  std::vector<double> h1(n), h2(n);
  for (std::size_t i = 0; i < n; ++i) {
    // (Q^p)_r = p Q^{p-1} Q_r
    h1[i] = c * gs.p() * pos_pow(gs.q()[i], gs.p() - 1.0) * gs.qr()[i];
    h2[i] = c * gs.grid().r(i) * gs.q()[i];
  }
  RankTwoPair pair{c, GridFunction(gs.grid_ptr(), std::move(h1)),
                   GridFunction(gs.grid_ptr(), std::move(h2))};

  KernelData kern{gs.qr(), 0.0};
  kern.f_norm_sq = inner_rdr(kern.f, kern.f);

  // numerical linear independence of {f, h1, h2}: smallest singular value of
  // the Gram matrix of the normalized columns
  Eigen::Matrix3d gram;
  const GridFunction* cols[3] = {&kern.f, &pair.h1, &pair.h2};
  double norms[3];
  for (int i = 0; i < 3; ++i) norms[i] = norm_rdr(*cols[i]);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      gram(i, j) = inner_rdr(*cols[i], *cols[j]) / (norms[i] * norms[j]);
    }
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(gram);
  if (svd.singularValues()(2) <= 1e-6) {
    throw InvalidArgument("build_operators: {f, h1, h2} numerically linearly dependent");
  }

  return OperatorSet{DiscreteOperator::build(gs, DiscreteOperator::Measure::rdr),
                     DiscreteOperator::build(gs, DiscreteOperator::Measure::r3dr),
                     std::move(pair), std::move(kern)};
}

GridFunction apply_V(const GridFunction& v, const RankTwoPair& pair) {
  double a1 = inner_rdr(v, pair.h2);
  double a2 = inner_rdr(v, pair.h1);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a1 * pair.h1[i] + a2 * pair.h2[i];
  }
  return GridFunction(v.grid_ptr(), std::move(out));
}

std::pair<GridFunction, GridFunction> exact_images(const GroundState& gs) {
  const auto& g = gs.grid();
  double qq = inner_rdr(gs.q(), gs.q());
  double c = std::sqrt((gs.p() - 1.0) / qq);
  double p = gs.p();
  std::size_t n = g.size();
  std::vector<double> w1(n), w2(n);
  w1[0] = 0.0;  // every term carries a factor of Q_r ~ r or Q_r^2/r ~ r
  for (std::size_t i = 0; i < n; ++i) {
    double q = gs.q()[i];
    double qr = gs.qr()[i];
    if (i > 0) {
      double r = g.r(i);
      w1[i] = -p * (p - 1.0) * c *
              ((p - 2.0) * pos_pow(q, p - 3.0) * qr * qr * qr +
               3.0 * pos_pow(q, p - 1.0) * qr - 3.0 * pos_pow(q, 2.0 * (p - 1.0)) * qr -
               (2.0 / r) * pos_pow(q, p - 2.0) * qr * qr);
    }
    w2[i] = -2.0 * c * qr - (p - 1.0) * c * g.r(i) * pos_pow(q, p);
  }
  return {GridFunction(gs.grid_ptr(), std::move(w1)), GridFunction(gs.grid_ptr(), std::move(w2))};
}

GridFunction project_Fperp(const GridFunction& v, const KernelData& kern) {
  double coeff = inner_rdr(v, kern.f) / kern.f_norm_sq;
  return add_scaled(v, -coeff, kern.f);
}

GridFunction solve_hstar(const GridFunction& h_tilde, const DiscreteOperator& op,
                         const KernelData& kern, double residual_floor) {
  const auto& g = h_tilde.grid();
  if (!g.compatible_with(*op.grid_ptr())) throw InvalidArgument("solve_hstar: grid mismatch");
  double ortho = inner_rdr(h_tilde, kern.f);
  double scale = norm_rdr(h_tilde) * std::sqrt(kern.f_norm_sq);
  if (scale == 0.0) return GridFunction::zeros(h_tilde.grid_ptr());
  if (std::abs(ortho) > 1e-8 * scale) {
    throw InvalidArgument("solve_hstar: right-hand side is not orthogonal to ker U");
  }

  // Bordered system in the hat space: unknowns u_0..u_{n-2} (Dirichlet drops
  // the last node) plus the multiplier mu deflating the kernel direction:
  //   U_hat u + mu f_hat = h_tilde / r,   <<u, f_hat>>_{r^3 dr} = 0.
  const auto& c = op.coefficients();
  const double h = c.h;
  std::size_t n = g.size();
  auto m = static_cast<Eigen::Index>(n - 1);

  GridFunction rhs_hat = DiscreteOperator::divide_by_r(h_tilde);
  GridFunction f_hat = DiscreteOperator::divide_by_r(kern.f);
  auto w3 = g.weights_r3dr();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * m));
  auto add = [&](Eigen::Index i, Eigen::Index j, double v) { trip.emplace_back(i, j, v); };
  add(0, 0, 8.0 / (h * h) + c.potential[0]);
  add(0, 1, -8.0 / (h * h));
  for (Eigen::Index i = 1; i < m; ++i) {
    double ri = g.r(static_cast<std::size_t>(i));
    double al = c.face[static_cast<std::size_t>(i - 1)];
    double ar = c.face[static_cast<std::size_t>(i)];
    double d = h * h * ri * ri * ri;
    add(i, i - 1, -al / d);
    add(i, i, (al + ar) / d + c.potential[static_cast<std::size_t>(i)]);
    if (i + 1 < m) add(i, i + 1, -ar / d);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    add(i, m, f_hat[static_cast<std::size_t>(i)]);                             // multiplier column
    add(m, i, w3[static_cast<std::size_t>(i)] * f_hat[static_cast<std::size_t>(i)]);  // constraint row
  }

  Eigen::SparseMatrix<double> A(m + 1, m + 1);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m + 1);
  for (Eigen::Index i = 0; i < m; ++i) b(i) = rhs_hat[static_cast<std::size_t>(i)];

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    throw SolverFailure("solve_hstar: bordered system factorization failed");
  }
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw SolverFailure("solve_hstar: bordered system solve failed");
  }

  std::vector<double> hstar(n, 0.0);
  for (Eigen::Index i = 1; i < m; ++i) {
    hstar[static_cast<std::size_t>(i)] = g.r(static_cast<std::size_t>(i)) * x(i);
  }
  GridFunction out(h_tilde.grid_ptr(), std::move(hstar));
  out = project_Fperp(out, kern);  // scrub the residual kernel component

  GridFunction image = op.measure() == DiscreteOperator::Measure::rdr
                           ? op.apply(out)
                           : GridFunction::zeros(out.grid_ptr());
  if (op.measure() != DiscreteOperator::Measure::rdr) {
    // accept either view; apply the conjugated operator explicitly
    GridFunction u = DiscreteOperator::divide_by_r(out);
    GridFunction w = op.apply(u);
    auto vals = w.values();
    std::vector<double> img(n);
    for (std::size_t i = 0; i < n; ++i) img[i] = g.r(i) * vals[i];
    image = GridFunction(out.grid_ptr(), std::move(img));
  }
  GridFunction diff = add_scaled(image, -1.0, h_tilde);
  double rel = norm_rdr(diff) / norm_rdr(h_tilde);
  if (!(rel < residual_floor)) {
    throw PostconditionError("solve_hstar: residual " + std::to_string(rel) +
                             " above floor " + std::to_string(residual_floor));
  }
  return out;
}

}  // namespace zkv
