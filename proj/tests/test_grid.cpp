#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "zkv/errors.hpp"
#include "zkv/grid.hpp"

using namespace zkv;

TEST_CASE("grid construction validates its invariants") {
  CHECK_THROWS_AS(RadialGrid(25.0, 4000), InvalidArgument);  // even n
  CHECK_THROWS_AS(RadialGrid(25.0, 1), InvalidArgument);
  CHECK_THROWS_AS(RadialGrid(-1.0, 11), InvalidArgument);
  RadialGrid g(25.0, 4001);
  CHECK(g.spacing() == doctest::Approx(0.00625).epsilon(1e-14));
  CHECK(g.r(0) == 0.0);
  CHECK(g.r(4000) == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("inner products reject mismatched grids and non-finite values") {
  auto g1 = make_grid(10.0, 101);
  auto g2 = make_grid(10.0, 201);
  auto u = GridFunction::zeros(g1);
  auto v = GridFunction::zeros(g2);
  CHECK_THROWS_AS(inner_rdr(u, v), InvalidArgument);
  CHECK_THROWS_AS(GridFunction(g1, std::vector<double>(50, 0.0)), InvalidArgument);
  std::vector<double> bad(101, 0.0);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(GridFunction(g1, std::move(bad)), InvalidArgument);
}

TEST_CASE("zero integrand integrates to zero") {
  auto g = make_grid(10.0, 101);
  auto z = GridFunction::zeros(g);
  CHECK(inner_rdr(z, z) == 0.0);
  CHECK(inner_r3dr(z, z) == 0.0);
  CHECK(norm2d_sq(z) == 0.0);
}

TEST_CASE("constant integrands match the exact antiderivatives") {
  double R = 7.0;
  auto g = make_grid(R, 281);
  auto one = GridFunction::sample(g, [](double) { return 1.0; });
  CHECK(inner_rdr(one, one) == doctest::Approx(R * R / 2.0).epsilon(1e-12));
  CHECK(inner_r3dr(one, one) == doctest::Approx(R * R * R * R / 4.0).epsilon(1e-12));
}

TEST_CASE("r3dr measure equals rdr measure with r folded into the operands") {
  auto g = make_grid(5.0, 501);
  auto u = GridFunction::sample(g, [](double r) { return std::exp(-r) * (1.0 + r); });
  auto v = GridFunction::sample(g, [](double r) { return std::cos(r); });
  auto ru = GridFunction::sample(g, [](double r) { return r * std::exp(-r) * (1.0 + r); });
  auto rv = GridFunction::sample(g, [](double r) { return r * std::cos(r); });
  double a = inner_r3dr(u, v);
  double b = inner_rdr(ru, rv);
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("bilinearity, symmetry and positivity") {
  auto g = make_grid(12.0, 241);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> dist;
  auto random_fn = [&] {
    std::vector<double> v(g->size());
    for (auto& x : v) x = dist(rng);
    return GridFunction(g, std::move(v));
  };
  for (int rep = 0; rep < 20; ++rep) {
    auto u = random_fn();
    auto v = random_fn();
    auto w = random_fn();
    double a = dist(rng);
    CHECK(inner_rdr(u, v) == doctest::Approx(inner_rdr(v, u)).epsilon(1e-12));
    double lhs = inner_rdr(add_scaled(w, a, u), v);
    double rhs = a * inner_rdr(u, v) + inner_rdr(w, v);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    CHECK(inner_rdr(u, u) >= 0.0);
  }
}

TEST_CASE("Simpson error decays at least 4th order on r^2") {
  double R = 3.0;
  double exact = std::pow(R, 6.0) / 6.0;  // integral of r^2*r^2*r dr
  auto err_at = [&](std::size_t n) {
    auto g = make_grid(R, n);
    auto u = GridFunction::sample(g, [](double r) { return r * r; });
    return std::abs(inner_rdr(u, u) - exact);
  };
  double e1 = err_at(41);
  double e2 = err_at(81);
  CHECK(e2 < e1 / 8.0);
}

TEST_CASE("norm2d_sq is 2*pi times the radial pairing") {
  auto g = make_grid(8.0, 161);
  auto u = GridFunction::sample(g, [](double r) { return std::exp(-r * r); });
  CHECK(norm2d_sq(u) == doctest::Approx(2.0 * M_PI * inner_rdr(u, u)).epsilon(1e-14));
}
