#include <cmath>
#include <functional>

#include "doctest.h"
#include "lcft/errors.hpp"
#include "lcft/fock.hpp"
#include "lcft/verma.hpp"

using namespace lcft;

namespace {

const cplx I(0, 1);

FockState monomial_state(cplx alpha, double Q, const YoungDiagram& nu, const YoungDiagram& nut) {
  FockState s{alpha, Q, {}};
  s.terms[{nu, nut}] = 1;
  return s;
}

// Fock monomials with |nu| + |nut| <= max_level.
std::vector<FockLabel> labels(int max_level) {
  std::vector<FockLabel> out;
  for (int l = 0; l <= max_level; ++l)
    for (int a = 0; a <= l; ++a)
      for (const auto& nu : enumerate(a))
        for (const auto& nut : enumerate(l - a)) out.push_back({nu, nut});
  return out;
}

// Probabilists' Gauss-Hermite rule via Golub-Welsch.
std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
  return {x, w};
}

// E[F conj(G)] over phi_1, phi_2 by tensor quadrature in (x_1, y_1, x_2, y_2).
cplx quad_pair(const PolyField& F, const PolyField& G) {
  const auto [x, w] = gauss_hermite(6);
  cplx s = 0;
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = 0; b < x.size(); ++b)
      for (std::size_t c = 0; c < x.size(); ++c)
        for (std::size_t d = 0; d < x.size(); ++d) {
          std::vector<cplx> phi = {0, cplx(x[a], x[b]) / 2.0, cplx(x[c], x[d]) / (2 * std::sqrt(2.0))};
          s += w[a] * w[b] * w[c] * w[d] * F.eval(phi) * std::conj(G.eval(phi));
        }
  return s;
}

PolyField mono(const Monomial& m, cplx c = 1) {
  PolyField p;
  p.add(m, c);
  return p;
}

}  // namespace

TEST_CASE("oscillator examples") {
  const double Q = background_charge(1.0);
  const cplx alpha(Q, 1.0);
  auto s = a_apply(1, monomial_state(alpha, Q, YoungDiagram({1}), {}));
  REQUIRE(s.terms.size() == 1);
  CHECK(s.terms.begin()->first == FockLabel{});
  CHECK(std::abs(s.terms.begin()->second - 0.5) < 1e-15);

  CHECK(a_apply(3, FockState::vacuum(alpha, Q)).terms.empty());

  auto s2 = a_apply(2, monomial_state(alpha, Q, YoungDiagram({2, 2}), {}));
  REQUIRE(s2.terms.size() == 1);
  CHECK(s2.terms.begin()->first.first == YoungDiagram({2}));
  CHECK(std::abs(s2.terms.begin()->second - 2.0) < 1e-15);

  // holomorphic and antiholomorphic oscillators commute
  CHECK(at_apply(1, monomial_state(alpha, Q, YoungDiagram({1}), {})).terms.empty());
  auto z = a_apply(0, FockState::vacuum(alpha, Q));
  CHECK(std::abs(z.terms.begin()->second - I * alpha / 2.0) < 1e-15);
}

TEST_CASE("Sugawara on the highest-weight vector") {
  const double Q = background_charge(1.0);
  const cplx alpha(Q, 1.0);
  const auto vac = FockState::vacuum(alpha, Q);
  auto l0 = L0_apply(0, vac);
  CHECK(std::abs(l0.terms.at({}) - conformal_weight(alpha, Q)) < 1e-14);
  for (int n = 1; n <= 4; ++n) {
    CHECK(L0_apply(n, vac).max_abs() < 1e-15);
    CHECK(Lt0_apply(n, vac).max_abs() < 1e-15);
  }
  // L_{-1}|alpha> = 2 A_{-1} A_0 |alpha> = i alpha A_{-1}|alpha>
  auto lm1 = L0_apply(-1, vac);
  REQUIRE(lm1.terms.size() == 1);
  CHECK(std::abs(lm1.terms.at({YoungDiagram({1}), {}}) - I * alpha) < 1e-14);
}

TEST_CASE("Sugawara action matches the Verma structure constants") {
  const Params p = Params::make(1.0);
  const cplx alpha(p.Q, 0.7);
  const cplx delta = conformal_weight(alpha, p.Q);
  for (int level = 0; level <= 3; ++level)
    for (const auto& nu : enumerate(level))
      for (int n = -2; n <= 3; ++n) {
        FockState lhs = L0_apply(n, descendant(p, alpha, nu, {}));
        FockState rhs = FockState::vacuum(alpha, p.Q).zero_like();
        for (const auto& [nu2, poly] : apply_L(n, basis_vector(nu)))
          rhs += descendant(p, alpha, nu2, {}) * poly.eval(delta, p.cL);
        CHECK((lhs - rhs).max_abs() < 1e-10);
      }
}

TEST_CASE("Virasoro relations and chiral commutation on Fock monomials") {
  const Params p = Params::make(0.8);
  const cplx alpha(1.1, 0.4);
  for (const auto& lab : labels(4)) {
    const auto s = monomial_state(alpha, p.Q, lab.first, lab.second);
    for (int n = -3; n <= 3; ++n)
      for (int m = -3; m <= 3; ++m) {
        FockState r = L0_apply(n, L0_apply(m, s)) - L0_apply(m, L0_apply(n, s)) - L0_apply(n + m, s) * cplx(n - m);
        FockState rt = Lt0_apply(n, Lt0_apply(m, s)) - Lt0_apply(m, Lt0_apply(n, s)) - Lt0_apply(n + m, s) * cplx(n - m);
        if (n == -m) {
          r -= s * (p.cL / 12 * (n * n * n - n));
          rt -= s * (p.cL / 12 * (n * n * n - n));
        }
        CHECK(r.max_abs() < 1e-12);
        CHECK(rt.max_abs() < 1e-12);
        CHECK((L0_apply(n, Lt0_apply(m, s)) - Lt0_apply(m, L0_apply(n, s))).max_abs() < 1e-12);
      }
  }
}

TEST_CASE("descendants are H0 eigenvectors") {
  const Params p = Params::make(1.5);
  const cplx alpha(0.9, -0.3);
  for (int l = 0; l <= 3; ++l)
    for (int a = 0; a <= l; ++a)
      for (const auto& nu : enumerate(a))
        for (const auto& nut : enumerate(l - a)) {
          const auto d = descendant(p, alpha, nu, nut);
          const cplx ev = 2.0 * conformal_weight(alpha, p.Q) + static_cast<double>(l);
          CHECK((H0_apply(d) - d * ev).max_abs() < 1e-11 * std::max(1.0, d.max_abs()));
          CHECK((P_apply(d) - d * cplx(l)).max_abs() < 1e-11 * std::max(1.0, d.max_abs()));
          CHECK(d.level() == l);
        }
  CHECK(descendant(p, alpha, {}, {}).terms.size() == 1);
  CHECK(descendant(p, alpha, YoungDiagram({2}), YoungDiagram({1})).level() == 3);
}

TEST_CASE("realization golden values") {
  const double Q = background_charge(1.0);
  const cplx alpha(Q, 1.0);
  auto r0 = realize(FockState::vacuum(alpha, Q));
  CHECK(r0.terms.size() == 1);
  CHECK(r0.terms.at({}) == cplx(1));
  CHECK(std::abs(r0.weight - (alpha - Q)) < 1e-15);

  auto r1 = realize(monomial_state(alpha, Q, YoungDiagram({1}), {}));
  REQUIRE(r1.terms.size() == 1);
  CHECK(r1.terms.at({{1, 1}}) == -I);  // -i phi_1, no constant term

  auto r11 = realize(monomial_state(alpha, Q, YoungDiagram({1, 1}), {}));
  REQUIRE(r11.terms.size() == 1);
  CHECK(r11.terms.at({{1, 2}}) == cplx(-1));

  auto rmix = realize(monomial_state(alpha, Q, YoungDiagram({1}), YoungDiagram({1})));
  REQUIRE(rmix.terms.size() == 2);
  CHECK(rmix.terms.at({{-1, 1}, {1, 1}}) == cplx(-1));
  CHECK(rmix.terms.at({}) == cplx(0.5));
}

TEST_CASE("Gaussian adjoint oracle: A_n^* = A_{-n} by quadrature") {
  std::vector<PolyField> polys = {mono({}), mono({{1, 1}}), mono({{-1, 1}}), mono({{2, 1}, {-1, 1}}),
                                  mono({{1, 2}, {-2, 1}}), mono({{1, 1}, {-1, 1}}, cplx(0.3, 0.2)),
                                  mono({{-2, 1}, {1, 1}, {-1, 1}})};
  for (int n : {1, 2})
    for (bool tilde : {false, true})
      for (const auto& F : polys)
        for (const auto& G : polys) {
          const cplx lhs = quad_pair(apply_A_poly(n, F, tilde), G);
          const cplx rhs = quad_pair(F, apply_A_poly(-n, G, tilde));
          CHECK(std::abs(lhs - rhs) < 1e-12);
          CHECK(std::abs(wick_pair(F, G) - quad_pair(F, G)) < 1e-12);
        }
}

TEST_CASE("gram: level 1 value and cross-layer equality") {
  const Params p1 = Params::make(1.0);
  auto g1 = gram(p1, 1.0, 1);
  CHECK(std::abs(g1(0, 0) - 29.0 / 8) < 1e-13);
  CHECK(std::abs(gram(p1, 1.0, 0)(0, 0) - 1.0) < 1e-15);
  for (double gamma : {0.5, 1.0, 1.5})
    for (double P : {0.5, 1.0, 2.0}) {
      const Params p = Params::make(gamma);
      const cplx delta = conformal_weight(cplx(p.Q, P), p.Q);
      for (int level = 0; level <= 4; ++level) {
        const auto g = gram(p, P, level);
        const auto f = evaluate(shapovalov(level), delta, p.cL);
        CHECK((g - f).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, f.cwiseAbs().maxCoeff()));
      }
    }
  CHECK_THROWS_AS(gram(p1, 1.0, 5), PreconditionError);
}

TEST_CASE("adjoint symmetry under the Gram pairing") {
  const Params p = Params::make(1.0);
  const cplx alpha(p.Q, 0.8);
  std::vector<FockState> states;
  for (int l = 0; l <= 3; ++l)
    for (const auto& nu : enumerate(l)) states.push_back(descendant(p, alpha, nu, {}));
  states.push_back(monomial_state(alpha, p.Q, YoungDiagram({2, 1}), YoungDiagram({1})));
  for (int n = -2; n <= 2; ++n)
    for (const auto& u : states)
      for (const auto& v : states) {
        const cplx a = gram_pair(L0_apply(n, u), v), b = gram_pair(u, L0_apply(-n, v));
        CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(a)));
        const cplx at = gram_pair(Lt0_apply(n, u), v), bt = gram_pair(u, Lt0_apply(-n, v));
        CHECK(std::abs(at - bt) < 1e-10 * std::max(1.0, std::abs(at)));
      }
}

TEST_CASE("assemble L_n from two Markovian generators") {
  const double Q = background_charge(1.0);
  const cplx alpha(0.7, 0.2);
  CHECK(assemble_Ln_from_semigroups(1, 3.0, FockState::vacuum(alpha, Q)).max_abs() < 1e-13);
  const auto s = monomial_state(alpha, Q, YoungDiagram({1, 1}), {});
  CHECK((assemble_Ln_from_semigroups(2, 3.0, s) - L0_apply(2, s)).max_abs() < 1e-12);
  for (const auto& lab : labels(3)) {
    const auto t = monomial_state(alpha, Q, lab.first, lab.second);
    for (int n = 1; n <= 3; ++n) CHECK((assemble_Ln_from_semigroups(n, 1.5, t) - L0_apply(n, t)).max_abs() < 1e-12);
  }
  CHECK_THROWS_AS(assemble_Ln_from_semigroups(1, 0.5, s), PreconditionError);
  CHECK_THROWS_AS(assemble_Ln_from_semigroups(1, 3.0, s, 1.0), PreconditionError);
}

TEST_CASE("json") {
  const auto j = to_json(monomial_state(cplx(1, 2), 2.5, YoungDiagram({2}), YoungDiagram({1})));
  CHECK(j["alpha"][1] == 2.0);
  CHECK(j["terms"][0]["nu"][0] == 2);
  CHECK(j["terms"][0]["nutilde"][0] == 1);
  CHECK(j["terms"][0]["coeff"][0] == 1.0);
}
