#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lcft/errors.hpp"
#include "lcft/flow.hpp"

using namespace lcft;

namespace {
const VectorField vz({1.0});
const VectorField v213({2.0, 0.0, 1.0});         // -2z - z^3
const VectorField vmix({1.0, 0.4, 0.0, 0.2});    // -z - 0.4z^2 - 0.2z^4
const VectorField vlog({1.0, 1.0});              // -z - z^2

std::vector<cplx> test_grid() {
  std::vector<cplx> g = {0.0, 0.5, cplx(0, -0.7), cplx(0.3, 0.4), cplx(-0.6, 0.2)};
  for (const auto& z : circle_nodes(8)) g.push_back(z);
  return g;
}
}  // namespace

TEST_CASE("markov_check examples") {
  CHECK(markov_check(vz) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(markov_check(v213) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(markov_check(VectorField({1.0, -5.0})) < 0);
  CHECK(markov_certificate(v213) > 0.9);
  CHECK(markov_certificate(v213) < markov_check(v213));
  CHECK_THROWS_AS(markov_check(vz, 10), PreconditionError);
}

TEST_CASE("omega_condition examples") {
  CHECK(omega_condition(vz, 1.0));
  CHECK(omega_condition(vz, 1000.0));
  CHECK(omega_condition(VectorField({10.0, 1.0}), 4));
  CHECK_FALSE(omega_condition(vlog, 4));
}

TEST_CASE("integrate: linear flow and f'_t(0)") {
  for (double t : {0.0, 0.3, 1.0, 3.0}) {
    auto p = integrate(vz, t, cplx(0.4, -0.2));
    CHECK(std::abs(p.f - std::exp(-t) * cplx(0.4, -0.2)) < 1e-12);
    CHECK(std::abs(p.df - std::exp(-t)) < 1e-12);
  }
  for (const auto* v : {&v213, &vmix, &vlog})
    for (double t : {0.5, 1.7, 3.0}) CHECK(std::abs(integrate(*v, t, 0.0).df - std::exp(-v->omega() * t)) < 1e-9);
}

TEST_CASE("integrate: logistic flow against its closed form") {
  // -z - z^2: f_t(z) = z e^{-t} / (1 + z (1 - e^{-t}))
  for (cplx z : {cplx(0.5), cplx(0.2, 0.7), cplx(-0.9, 0.1)}) {
    const double t = 1.0, e = std::exp(-t);
    const cplx den = 1.0 + z * (1 - e);
    auto p = integrate(vlog, t, z);
    CHECK(std::abs(p.f - z * e / den) < 1e-11);
    CHECK(std::abs(p.df - e / (den * den)) < 1e-11);
  }
}

TEST_CASE("semigroup and contraction") {
  for (double s : {0.3, 0.7})
    for (double t : {0.3, 0.7})
      for (cplx z : {cplx(0.6, 0.2), std::polar(1.0, 2.0)}) {
        const auto a = integrate(vmix, s + t, z);
        const auto b1 = integrate(vmix, s, z);
        const auto b2 = integrate(vmix, t, b1.f);
        CHECK(std::abs(a.f - b2.f) < 1e-10);
        CHECK(std::abs(a.df - b2.df * b1.df) < 1e-10);
      }
  const double m = markov_check(v213);
  for (const auto& z : test_grid())
    for (double t : {0.5, 2.0}) CHECK(std::abs(integrate(v213, t, z).f) <= std::exp(-m * t) * std::abs(z) + 1e-12);
}

TEST_CASE("integrate preconditions") {
  CHECK_THROWS_AS(integrate(VectorField({1.0, -5.0}), 1.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(integrate(vz, -1.0, 0.1), PreconditionError);
  CHECK_THROWS_AS(integrate(vz, 1.0, 1.5), PreconditionError);
}

TEST_CASE("flow_identity_residual") {
  CHECK(flow_identity_residual(vz, 1.0, test_grid()) < 1e-12);
  CHECK(flow_identity_residual(v213, 0.0, test_grid()) == 0.0);
  CHECK(flow_identity_residual(v213, 0.7, test_grid()) < 1e-8);
  CHECK(flow_identity_residual(vmix, 3.0, test_grid()) < 1e-8);
}

TEST_CASE("extract_h: identity, closed form and recursion") {
  auto hz = extract_h(vz, test_grid());
  for (std::size_t i = 0; i < hz.grid.size(); ++i) CHECK(std::abs(hz.h[i] - hz.grid[i]) < 1e-12);

  // -2z - z^3: h(z) = z / sqrt(1 + z^2/2)
  auto h = extract_h(v213, test_grid());
  for (std::size_t i = 0; i < h.grid.size(); ++i) {
    const cplx z = h.grid[i];
    CHECK(std::abs(h.h[i] - z / std::sqrt(1.0 + z * z / 2.0)) < 1e-9);
  }
  CHECK(std::abs(h.dh[0] - 1.0) < 1e-9);
  CHECK(h_equation_residual(h) < 1e-8);

  for (const auto* v : {&v213, &vmix, &vlog}) {
    ExtractOptions opt;
    opt.taylor_order = 12;
    auto hd = extract_h(*v, {0.0, cplx(0.2, 0.3)}, opt);
    const auto rec = h_taylor_recursive(*v, 12);
    for (int m = 0; m <= 12; ++m) CHECK(std::abs(hd.taylor[m] - rec[m]) < 1e-9);
  }
  // -z - z^2: h = z/(1+z), recursion gives alternating unit coefficients
  const auto r = h_taylor_recursive(vlog, 6);
  for (int m = 1; m <= 6; ++m) CHECK(std::abs(r[m] - std::pow(-1.0, m + 1)) < 1e-15);
}

TEST_CASE("extract_h does not converge when the flow has a boundary fixed point") {
  // -z - z^2 fixes z = -1, so e^t f_t(-1) diverges
  CHECK_THROWS_AS(extract_h(vlog, {cplx(-1.0, 0.0)}), ComputationError);
}

TEST_CASE("normalize_fixed_point") {
  // v = -(z - a)(1 - a z) with a = 0.3 conjugates to -(1 - a^2) w
  const double a = 0.3;
  const VectorField v({1 + a * a, -a}, -a);
  CHECK(std::abs(interior_zero(v) - a) < 1e-14);
  const auto u = normalize_fixed_point(v);
  CHECK(std::abs(u(0.0)) < 1e-14);
  CHECK(std::abs(u.coeff(0) - (1 - a * a)) < 1e-12);
  for (int n = 1; n <= u.degree(); ++n) CHECK(std::abs(u.coeff(n)) < 1e-12);
  CHECK((markov_check(v) > 0) == (markov_check(u) > 0));

  // cubic field with a displaced zero: truncation keeps the sign of the margin
  const VectorField w({2.0, 0.1, 0.2}, cplx(0.2, -0.1));
  REQUIRE(markov_check(w) > 0);
  const auto wn = normalize_fixed_point(w);
  CHECK(std::abs(wn(0.0)) < 1e-14);
  CHECK(markov_check(wn) > 0);

  const auto same = normalize_fixed_point(v213);
  CHECK(same.v == v213.v);

  CHECK_THROWS_AS(normalize_fixed_point(VectorField({1.0}, -2.0)), ComputationError);
}

TEST_CASE("trajectory csv") {
  auto rows = trajectory(vz, {0.0, 1.0}, {0.5});
  REQUIRE(rows.size() == 2);
  CHECK(std::abs(rows[1].f - 0.5 * std::exp(-1.0)) < 1e-12);
  const auto csv = trajectory_csv(rows);
  CHECK(csv.rfind("t,re_z0,im_z0,re_f,im_f,re_df,im_df\n", 0) == 0);
}
