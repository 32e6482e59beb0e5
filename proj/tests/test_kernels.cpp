#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lcft/errors.hpp"
#include "lcft/kernels.hpp"

using namespace lcft;

namespace {
const double kPi = std::numbers::pi;
const VectorField vz({1.0});
const VectorField v213({2.0, 0.0, 1.0});

Eigen::MatrixXcd herm_part(const Eigen::MatrixXcd& m) { return (m + m.adjoint()) / 2.0; }
double min_eig(const Eigen::MatrixXcd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm_part(m)).eigenvalues().minCoeff();
}
}  // namespace

TEST_CASE("green_disk") {
  CHECK(green_disk(0.5, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const cplx a(0.1, -0.6), b(-0.3, 0.2);
  CHECK(std::abs(green_disk(a, b) - green_disk(b, a)) < 1e-15);
  // 30-digit reference value
  CHECK(std::abs(green_disk(cplx(0, 0.3), -0.4) - 0.70029583291035750008) < 1e-15);
  CHECK_THROWS_AS(green_disk(a, a), PreconditionError);
}

TEST_CASE("mode_covariance: dilation field closed form") {
  const int N = 6;
  for (double t : {0.2, 1.0}) {
    const auto c = mode_covariance(vz, t, t, N);
    for (int n = -N; n <= N; ++n)
      for (int m = -N; m <= N; ++m) {
        cplx expect = 0;
        if (n == m) expect = n == 0 ? t : (1 - std::exp(-2.0 * std::abs(n) * t)) / (2.0 * std::abs(n));
        CHECK(std::abs(c.at(n, m) - expect) < 1e-12);
      }
  }
  // cross-time: (e^{-|n|(t-s)} - e^{-|n|(t+s)}) / (2|n|), zero mode min(s, t)
  const double s = 0.4, t = 0.9;
  for (const auto& c : {mode_covariance(vz, s, t, N), mode_covariance(vz, t, s, N)})
    for (int n = -N; n <= N; ++n) {
      const double e = n == 0 ? s : (std::exp(-std::abs(n) * (t - s)) - std::exp(-std::abs(n) * (t + s))) / (2.0 * std::abs(n));
      CHECK(std::abs(c.at(n, n) - e) < 1e-12);
    }
  CHECK(mode_covariance(vz, 0.0, 0.7, N).C.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mode_covariance: Brownian zero mode and positivity") {
  const VectorField v1({1.0, 0.2, 0.0, 0.1}), v2({2.0, 0.3, 0.5});
  for (const auto* v : {&v1, &v2})
    for (double s : {0.4, 0.9})
      for (double t : {0.4, 0.9}) {
        const auto c = mode_covariance(*v, s, t, 4);
        CHECK(std::abs(c.at(0, 0) - v->omega() * std::min(s, t)) < 1e-6);
        if (s == t) {
          CHECK((c.C - c.C.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
          CHECK(min_eig(c.C) >= -1e-8);
        }
      }
  // swapping the time arguments transposes the cross covariance
  const auto a = mode_covariance(v2, 0.3, 0.8, 3), b = mode_covariance(v2, 0.8, 0.3, 3);
  CHECK((a.C - b.C.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(mode_covariance(VectorField({1.0, -5.0}), 0.1, 0.1, 2), PreconditionError);
}

TEST_CASE("hpq closed form for monomials") {
  const VectorField mono2({0.0, 0.0, 1.0});  // v_2 = 1
  CHECK(hpq(mono2, 3, 1) == cplx(0.5));
  CHECK(hpq(mono2, 3, 5) == cplx(0.5));
  CHECK(hpq(mono2, 3, 2) == cplx(0));
  for (int n = 0; n <= 5; ++n) {
    std::vector<cplx> c(n + 1, 0);
    c[n] = 1;
    const VectorField v(c);
    for (int p = -8; p <= 8; ++p)
      for (int q = -8; q <= 8; ++q) {
        const double expect = 0.5 * ((q == p - n) + (q == p + n));
        CHECK(hpq(v, p, q) == cplx(expect));
      }
  }
}

TEST_CASE("hpq: symmetry, reality and additivity") {
  const VectorField a({1.0, 0.3, -0.2}), b({0.5, 0.0, 0.1, 0.4});
  std::vector<cplx> s(4);
  for (int n = 0; n < 4; ++n) s[n] = a.coeff(n) + b.coeff(n);
  const VectorField ab(s);
  for (int p = -6; p <= 6; ++p)
    for (int q = -6; q <= 6; ++q) {
      CHECK(hpq(a, p, q).imag() == 0);
      CHECK(hpq(a, p, q) == hpq(a, -p, -q));
      CHECK(std::abs(hpq(ab, p, q) - hpq(a, p, q) - hpq(b, p, q)) < 1e-15);
    }
}

TEST_CASE("hpq agrees with the finite-difference oracle") {
  // -2z - z^{n+1} is Markovian; subtracting the omega part isolates the monomial
  const int N = 8;
  for (int n = 1; n <= 5; ++n) {
    std::vector<cplx> c(n + 1, 0);
    c[0] = 2;
    c[n] = 1;
    const VectorField v(c);
    const auto fd = hpq_finite_difference(v, N, 1e-4);
    for (int p = -N; p <= N; ++p)
      for (int q = -N; q <= N; ++q) {
        const cplx mono = fd(p + N, q + N) - (p == q ? 2.0 : 0.0);
        CHECK(std::abs(mono - 0.5 * ((q == p - n) + (q == p + n))) < 1e-3);
        CHECK(std::abs(fd(p + N, q + N) - hpq(v, p, q)) < 1e-3);
      }
  }
}

TEST_CASE("xh_kernel: identity map") {
  HData hd;
  hd.grid = circle_nodes(256);
  hd.h = hd.grid;
  hd.dh.assign(256, 1.0);
  const auto k = xh_kernel(hd, 8);
  const auto modes = k.modes();
  for (std::size_t i = 0; i < modes.size(); ++i)
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const double expect = i == j ? kPi / std::abs(modes[i]) : 0.0;
      CHECK(std::abs(k.gram(i, j) - expect) < 1e-9);
    }
  CHECK(k.rho == 0);
}

TEST_CASE("xh_kernel: h from -2z - z^3") {
  const auto hd = extract_h(v213, circle_nodes(512));
  const auto k = xh_kernel(hd, 8);
  CHECK(k.min_eigenvalue >= -1e-8);
  CHECK(k.rho > 0);
  CHECK(k.rho < 1);
  // independent route: closed-form h, coarser trapezoid rule
  HData cf;
  cf.grid = circle_nodes(128);
  for (const auto& z : cf.grid) {
    const cplx r = std::sqrt(1.0 + z * z / 2.0);
    cf.h.push_back(z / r);
    cf.dh.push_back(1.0 / (r * r * r));
  }
  const auto k2 = xh_kernel(cf, 8);
  CHECK((k.gram - k2.gram).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("xh_kernel rejects non-injective boundary values") {
  HData hd;
  hd.grid = circle_nodes(64);
  for (const auto& z : hd.grid) {
    hd.h.push_back(z + 0.5 * z * z);  // h'(-1) = 0
    hd.dh.push_back(1.0 + z);
  }
  CHECK_THROWS_AS(xh_kernel(hd, 4), ComputationError);
}

TEST_CASE("CFactor derivatives") {
  const auto b = CFactor::bump(2.0, 6);
  for (double c : {-1.3, 0.0, 0.7})
    for (int d = 0; d <= 3; ++d) {
      const double h = 1e-4;
      const double fd = (b.deriv(d, c + h) - b.deriv(d, c - h)) / (2 * h);
      CHECK(std::abs(fd - b.deriv(d + 1, c)) < 1e-6);
    }
  CHECK(b.deriv(0, 2.5) == 0);
  CHECK(CFactor::exponential(0.5).deriv(2, 1.0) == doctest::Approx(0.25 * std::exp(0.5)));
}

TEST_CASE("apply_generator examples") {
  const double Q = background_charge(1.0);
  CPoly one;
  one.add({}, 0, 1);
  // constant in c as well: only the weight term survives
  auto h1 = apply_generator(v213, Q, one).collapse(0.0);
  REQUIRE(h1.terms.size() == 1);
  CHECK(std::abs(h1.terms.at({}) - 2.0 * Q * Q / 2) < 1e-14);
  // with a c-profile the Brownian part -(omega/2) d_c^2 appears
  CHECK(std::abs(apply_generator(v213, Q, one).terms.at({{}, 2}) - (-1.0)) < 1e-14);

  // F = phi_1 phi_{-1}, v = -z: (Q^2/2 + 2) phi_1 phi_{-1} - 1
  CPoly f;
  f.add({{-1, 1}, {1, 1}}, 0, 1);
  auto hf = apply_generator(vz, Q, f);
  CHECK(hf.terms.size() == 3);
  CHECK(std::abs(hf.terms.at({{{-1, 1}, {1, 1}}, 2}) - (-0.5)) < 1e-14);  // -(1/2) d_c^2 of the c-profile
  CHECK(std::abs(hf.terms.at({{{-1, 1}, {1, 1}}, 0}) - (Q * Q / 2 + 2)) < 1e-14);
  CHECK(std::abs(hf.terms.at({{}, 0}) - (-1.0)) < 1e-14);
}

TEST_CASE("apply_generator matches the Sugawara H_v on realized states") {
  const Params p = Params::make(1.0);
  const cplx alpha(0.8, 0.6);
  const VectorField vs[] = {VectorField({2.0, 0.3}), VectorField({1.5, cplx(0.2, 0.3), cplx(-0.1, 0.05)})};
  for (const auto& v : vs)
    for (int l = 0; l <= 3; ++l)
      for (int a = 0; a <= l; ++a)
        for (const auto& nu : enumerate(a))
          for (const auto& nut : enumerate(l - a)) {
            FockState s{alpha, p.Q, {}};
            s.terms[{nu, nut}] = 1;
            const PolyField lhs = realize(Hv_apply(v, s));
            const PolyField rhs = apply_generator(v, p.Q, CPoly::from_poly(realize(s))).collapse(alpha - p.Q);
            PolyField diff = lhs;
            for (const auto& [m, c] : rhs.terms) diff.add(m, -c);
            double r = 0;
            for (const auto& [m, c] : diff.terms) r = std::max(r, std::abs(c));
            CHECK(r < 1e-10);
          }
}

TEST_CASE("matrix csv and json") {
  Eigen::MatrixXcd m(2, 2);
  m << 1, cplx(0, 2), 3, 4;
  const auto csv = matrix_csv(m, {-1, 1});
  CHECK(csv.rfind("part,mode,-1,1\nre,-1,1,0\n", 0) == 0);
  const auto j = matrix_json(m, {-1, 1});
  CHECK(j["im"][0][1] == 2.0);
}
