// Brute-force spectral cross-check: dense symmetric eigendecompositions of the
// discretized U and T = U + V, independent of the f-f* algebra they confirm.

#include "zkv/oracle.hpp"

#include <cmath>
#include <random>

#include "zkv/errors.hpp"

namespace zkv {

OracleMatrices oracle_matrices(const GroundState& gs_in, GridPtr oracle_grid) {
  GroundState gs = gs_in.grid().compatible_with(*oracle_grid) ? gs_in
                                                              : gs_in.restricted_to(oracle_grid);
  const auto& g = gs.grid();
  DiscreteOperator hat = DiscreteOperator::build(gs, DiscreteOperator::Measure::r3dr);
  const auto& c = hat.coefficients();
  const double h = c.h;
  auto m = static_cast<Eigen::Index>(g.size() - 1);  // Dirichlet node dropped

  OracleMatrices out;
  out.weights = Eigen::VectorXd(m);
  for (Eigen::Index i = 0; i < m; ++i) out.weights(i) = c.fv_weights[static_cast<std::size_t>(i)];
  Eigen::VectorXd sqw = out.weights.cwiseSqrt();

  // dense U-hat, then the sqrt-weight similarity transform
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  A(0, 0) = 8.0 / (h * h) + c.potential[0];
  A(0, 1) = -8.0 / (h * h);
  for (Eigen::Index i = 1; i < m; ++i) {
    double ri = g.r(static_cast<std::size_t>(i));
    double al = c.face[static_cast<std::size_t>(i - 1)];
    double ar = c.face[static_cast<std::size_t>(i)];
    double d = h * h * ri * ri * ri;
    A(i, i - 1) = -al / d;
    A(i, i) = (al + ar) / d + c.potential[static_cast<std::size_t>(i)];
    if (i + 1 < m) A(i, i + 1) = -ar / d;
  }
  out.U = sqw.asDiagonal() * A * sqw.cwiseInverse().asDiagonal();
  out.U = 0.5 * (out.U + out.U.transpose()).eval();

  // rank-two part in the same coordinates
  double qq = inner_rdr(gs.q(), gs.q());
  double cnorm = std::sqrt((gs.p() - 1.0) / qq);
  std::size_t n = g.size();
  std::vector<double> h1(n), h2(n);
  for (std::size_t i = 0; i < n; ++i) {
    double qv = gs.q()[i];
    double w = (qv > 0.0) ? std::exp((gs.p() - 1.0) * std::log(qv)) : 0.0;
    h1[i] = cnorm * gs.p() * w * gs.qr()[i];
    h2[i] = cnorm * g.r(i) * qv;
  }
  GridFunction h1f(gs.grid_ptr(), std::move(h1));
  GridFunction h2f(gs.grid_ptr(), std::move(h2));
  GridFunction h1_hat = DiscreteOperator::divide_by_r(h1f);
  GridFunction h2_hat = DiscreteOperator::divide_by_r(h2f);
  Eigen::VectorXd g1(m), g2(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    g1(i) = sqw(i) * h1_hat[static_cast<std::size_t>(i)];
    g2(i) = sqw(i) * h2_hat[static_cast<std::size_t>(i)];
  }
  out.T = out.U + g1 * g2.transpose() + g2 * g1.transpose();

  GridFunction f_hat = DiscreteOperator::divide_by_r(gs.qr());
  out.f = Eigen::VectorXd(m);
  for (Eigen::Index i = 0; i < m; ++i) out.f(i) = sqw(i) * f_hat[static_cast<std::size_t>(i)];
  out.f.normalize();
  return out;
}

SpectrumSummary full_spectrum(const Eigen::MatrixXd& A, int k, double kernel_floor) {
  double scale = A.cwiseAbs().maxCoeff();
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1e-300)) {
    throw InvalidArgument("full_spectrum: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverFailure("full_spectrum: eigensolver failed");

  SpectrumSummary s;
  const auto& ev = es.eigenvalues();
  auto count = static_cast<int>(ev.size());
  for (int i = 0; i < std::min(k, count); ++i) s.lowest_eigenvalues.push_back(ev(i));
  for (int i = 0; i < count; ++i) {
    if (ev(i) < -kernel_floor) ++s.negative_count;
    if (std::abs(ev(i)) <= kernel_floor) s.kernel_candidates.push_back(ev(i));
  }
  s.constrained_minimum = std::numeric_limits<double>::quiet_NaN();
  return s;
}

double constrained_minimum(const Eigen::MatrixXd& T, const Eigen::VectorXd& f) {
  Eigen::Index m = T.rows();
  Eigen::VectorXd u = f.normalized();
  // Householder reflector mapping u to +-e1; columns 2..m of H span {f}^perp.
  Eigen::VectorXd v = u;
  v(0) += (u(0) >= 0.0 ? 1.0 : -1.0) * u.norm();
  v.normalize();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m) - 2.0 * v * v.transpose();
  Eigen::MatrixXd B = H * T * H;
  Eigen::MatrixXd Bp = B.bottomRightCorner(m - 1, m - 1);
  Bp = 0.5 * (Bp + Bp.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Bp, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverFailure("constrained_minimum: eigensolver failed");
  return es.eigenvalues()(0);
}

OracleReport run_oracle(const GroundState& gs, GridPtr oracle_grid, double kernel_floor, int k,
                        int identity_samples) {
  OracleMatrices mats = oracle_matrices(gs, std::move(oracle_grid));
  OracleReport rep;
  rep.u_spectrum = full_spectrum(mats.U, k, kernel_floor);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mats.T);
  if (es.info() != Eigen::Success) throw SolverFailure("run_oracle: eigensolver failed for T");
  const auto& ev = es.eigenvalues();
  auto count = static_cast<int>(ev.size());
  for (int i = 0; i < std::min(k, count); ++i) rep.t_spectrum.lowest_eigenvalues.push_back(ev(i));
  for (int i = 0; i < count; ++i) {
    if (ev(i) < -kernel_floor) ++rep.t_spectrum.negative_count;
    if (std::abs(ev(i)) <= kernel_floor) rep.t_spectrum.kernel_candidates.push_back(ev(i));
  }
  rep.t_spectrum.constrained_minimum = constrained_minimum(mats.T, mats.f);

  // e: lowest eigenvector of T; f*: the discrete-exact solve T f* = f makes
  // the energy-split identity a pure linear-algebra statement.
  Eigen::VectorXd e = es.eigenvectors().col(0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(mats.T);
  Eigen::VectorXd fstar = lu.solve(mats.f);
  fstar += lu.solve(mats.f - mats.T * fstar);
  rep.fstar_e_overlap = std::abs(fstar.dot(e)) / (fstar.norm() * e.norm());

  double ffstar = mats.f.dot(fstar);
  double efstar = e.dot(fstar);
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < identity_samples; ++s) {
    Eigen::VectorXd v(mats.f.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    v -= mats.f * mats.f.dot(v);  // f has unit norm
    double ve = v.dot(e);
    Eigen::VectorXd w = v - (ve / efstar) * fstar;
    double lhs = v.dot(mats.T * v);
    double rhs = -(ve * ve) * ffstar / (efstar * efstar) + w.dot(mats.T * w);
    double rel = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    worst = std::max(worst, rel);
  }
  rep.identity_max_rel_err = worst;
  rep.identity_ok = worst < 1e-8;

  rep.agrees = rep.t_spectrum.negative_count == 1 && rep.t_spectrum.kernel_candidates.empty() &&
               rep.t_spectrum.constrained_minimum > 0.0;
  return rep;
}

}  // namespace zkv
