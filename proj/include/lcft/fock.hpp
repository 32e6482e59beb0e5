#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <utility>

#include "json.hpp"
#include "lcft/flow.hpp"
#include "lcft/model.hpp"
#include "lcft/partitions.hpp"

namespace lcft {

struct Params {
  double gamma = 1, Q = 2.5, mu = 0, cL = 38.5;
  static Params make(double gamma, double mu = 0);
};

// (nu, nutilde): holomorphic and antiholomorphic creation-mode multisets.
using FockLabel = std::pair<YoungDiagram, YoungDiagram>;

// sum coeff * A_{-nu_k}...A_{-nu_1} At_{-nut_j}...At_{-nut_1} |alpha>
// with A_0 |alpha> = At_0 |alpha> = (i alpha / 2)|alpha>.
struct FockState {
  cplx alpha = 0;
  double Q = 2.5;
  std::map<FockLabel, cplx> terms;

  static FockState vacuum(cplx alpha, double Q);
  FockState zero_like() const { return {alpha, Q, {}}; }
  void add(const FockLabel& k, cplx c);
  FockState& operator+=(const FockState& o);
  FockState& operator-=(const FockState& o);
  FockState operator+(const FockState& o) const { FockState r = *this; return r += o; }
  FockState operator-(const FockState& o) const { FockState r = *this; return r -= o; }
  FockState operator*(cplx s) const;
  double max_abs() const;
  // |nu| + |nut| if all terms share it
  std::optional<int> level() const;
};

FockState a_apply(int n, const FockState& s);
FockState at_apply(int n, const FockState& s);
// L_n = -i(n+1)Q A_n + sum_m :A_{n-m} A_m:
FockState L0_apply(int n, const FockState& s);
FockState Lt0_apply(int n, const FockState& s);
FockState H0_apply(const FockState& s);  // L_0 + Lt_0
FockState P_apply(const FockState& s);   // H0 - 2 Delta_alpha

FockState descendant(const Params& p, cplx alpha, const YoungDiagram& nu, const YoungDiagram& nut);

// omega H0 + sum_{n>=1} (v_n L_n + conj(v_n) Lt_n)
FockState Hv_apply(const VectorField& v, const FockState& s);

// L_n = (1/2)(H_{omega v_0 + v_n} - i H_{omega v_0 + i v_n}) - (1/2) omega (1 - i) H0.
// Both auxiliary fields must pass the Markov check; mu must be 0.
FockState assemble_Ln_from_semigroups(int n, double omega, const FockState& s, double mu = 0);

// Polynomial in phi_k (k != 0, phi_{-k} = conj(phi_k)) times e^{weight c}.
using Monomial = std::map<int, int>;  // mode -> exponent
struct PolyField {
  cplx weight = 0;  // alpha - Q
  std::map<Monomial, cplx> terms;

  void add(const Monomial& m, cplx c);
  PolyField& operator+=(const PolyField& o);
  PolyField mul_phi(int k) const;
  PolyField deriv(int k) const;  // Wirtinger derivative in phi_k
  int degree() const;
  // Value at phi_k = phi[k] (k >= 1), phi_{-k} = conj(phi[k]); the c weight is left out.
  cplx eval(const std::vector<cplx>& phi) const;
};

// Realized oscillators, n != 0: A_n = (i/2) d_n and A_{-n} = -i n phi_n + (i/2) d_{-n}
// for n > 0; the tilde versions swap phi_k <-> phi_{-k}.
PolyField apply_A_poly(int n, const PolyField& f, bool tilde = false);

// Creation modes realized as A_{-n} = -i n phi_n + (i/2) d_{-n} and
// At_{-n} = -i n phi_{-n} + (i/2) d_n on polynomials.
PolyField realize(const FockState& s);

// E[u conj(v)] for independent complex Gaussian modes with E|phi_n|^2 = 1/(2n).
cplx wick_pair(const PolyField& u, const PolyField& v);
cplx gram_pair(const FockState& u, const FockState& v);

// Gram matrix of realized holomorphic descendants at alpha = Q + iP.
Eigen::MatrixXcd gram(const Params& p, double P, int level, int max_level = 4);

nlohmann::json to_json(const FockState& s);

}  // namespace lcft
