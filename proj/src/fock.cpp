#include "lcft/fock.hpp"

#include <algorithm>
#include <cmath>

#include "lcft/errors.hpp"

namespace lcft {

namespace {
const cplx I(0, 1);
}

Params Params::make(double gamma, double mu) {
  if (!(gamma > 0 && gamma < 2)) throw PreconditionError("gamma must lie in (0,2)");
  if (mu < 0) throw PreconditionError("mu must be non-negative");
  Params p;
  p.gamma = gamma;
  p.Q = background_charge(gamma);
  p.mu = mu;
  p.cL = central_charge(gamma);
  return p;
}

// ---- FockState ----

FockState FockState::vacuum(cplx alpha, double Q) {
  FockState s{alpha, Q, {}};
  s.terms[{YoungDiagram{}, YoungDiagram{}}] = 1;
  return s;
}

void FockState::add(const FockLabel& k, cplx c) {
  if (c == cplx(0)) return;
  auto [it, ins] = terms.try_emplace(k, c);
  if (!ins) {
    it->second += c;
    if (it->second == cplx(0)) terms.erase(it);
  }
}

FockState& FockState::operator+=(const FockState& o) {
  for (const auto& [k, c] : o.terms) add(k, c);
  return *this;
}

FockState& FockState::operator-=(const FockState& o) {
  for (const auto& [k, c] : o.terms) add(k, -c);
  return *this;
}

FockState FockState::operator*(cplx s) const {
  FockState r = zero_like();
  if (s == cplx(0)) return r;
  for (const auto& [k, c] : terms) r.terms.emplace(k, c * s);
  return r;
}

double FockState::max_abs() const {
  double m = 0;
  for (const auto& [k, c] : terms) m = std::max(m, std::abs(c));
  return m;
}

std::optional<int> FockState::level() const {
  std::optional<int> l;
  for (const auto& [k, c] : terms) {
    const int lk = k.first.size() + k.second.size();
    if (l && *l != lk) return std::nullopt;
    l = lk;
  }
  return l ? l : std::optional<int>(0);
}

namespace {

// Oscillators of one chirality; `tilde` selects which diagram of the label moves.
FockState osc_apply(int n, const FockState& s, bool tilde) {
  if (n == 0) return s * (I * s.alpha / 2.0);
  FockState r = s.zero_like();
  for (const auto& [k, c] : s.terms) {
    const YoungDiagram& d = tilde ? k.second : k.first;
    if (n < 0) {
      FockLabel nk = k;
      (tilde ? nk.second : nk.first) = d.insert(-n);
      r.add(nk, c);
    } else {
      // [A_n, A_{-n}] = n/2 for each occurrence of n
      const int mult = d.multiplicity(n);
      if (!mult) continue;
      FockLabel nk = k;
      (tilde ? nk.second : nk.first) = d.remove(n);
      r.add(nk, c * (mult * n / 2.0));
    }
  }
  return r;
}

int max_mode(const FockState& s) {
  int l = 0;
  for (const auto& [k, c] : s.terms) l = std::max(l, k.first.size() + k.second.size());
  return l;
}

FockState sugawara(int n, const FockState& s, bool tilde) {
  FockState r = osc_apply(n, s, tilde) * (-I * static_cast<double>(n + 1) * s.Q);
  const int bound = max_mode(s) + std::abs(n) + 1;
  for (int m = -bound; m <= bound; ++m) {
    const int a = n - m, b = m;
    // :A_a A_b: puts the positive (annihilating) index on the right
    if (b > 0) r += osc_apply(a, osc_apply(b, s, tilde), tilde);
    else if (a > 0) r += osc_apply(b, osc_apply(a, s, tilde), tilde);
    else r += osc_apply(a, osc_apply(b, s, tilde), tilde);
  }
  return r;
}

}  // namespace

FockState a_apply(int n, const FockState& s) { return osc_apply(n, s, false); }
FockState at_apply(int n, const FockState& s) { return osc_apply(n, s, true); }
FockState L0_apply(int n, const FockState& s) { return sugawara(n, s, false); }
FockState Lt0_apply(int n, const FockState& s) { return sugawara(n, s, true); }
FockState H0_apply(const FockState& s) { return L0_apply(0, s) + Lt0_apply(0, s); }

FockState P_apply(const FockState& s) {
  return H0_apply(s) - s * (2.0 * conformal_weight(s.alpha, s.Q));
}

FockState descendant(const Params& p, cplx alpha, const YoungDiagram& nu, const YoungDiagram& nut) {
  FockState s = FockState::vacuum(alpha, p.Q);
  // rightmost factor (largest part) acts first
  for (int part : nut.parts()) s = Lt0_apply(-part, s);
  for (int part : nu.parts()) s = L0_apply(-part, s);
  return s;
}

FockState Hv_apply(const VectorField& v, const FockState& s) {
  FockState r = H0_apply(s) * cplx(v.omega());
  for (int n = 1; n <= v.degree(); ++n) {
    if (v.v[n] == cplx(0)) continue;
    r += L0_apply(n, s) * v.v[n];
    r += Lt0_apply(n, s) * std::conj(v.v[n]);
  }
  return r;
}

FockState assemble_Ln_from_semigroups(int n, double omega, const FockState& s, double mu) {
  if (n < 1) throw PreconditionError("assemble: n must be positive");
  if (mu != 0) throw PreconditionError("assemble: only the free case mu = 0 is exact");
  std::vector<cplx> c1(n + 1, 0), c2(n + 1, 0);
  c1[0] = c2[0] = omega;
  c1[n] = 1;
  c2[n] = I;
  const VectorField v1(c1), v2(c2);
  if (!(markov_certificate(v1) > 0) || !(markov_certificate(v2) > 0))
    throw PreconditionError("assemble: omega too small, combined fields are not Markovian");
  return (Hv_apply(v1, s) - Hv_apply(v2, s) * I) * 0.5 - H0_apply(s) * (0.5 * omega * (1.0 - I));
}

// ---- PolyField ----

void PolyField::add(const Monomial& m, cplx c) {
  if (c == cplx(0)) return;
  auto [it, ins] = terms.try_emplace(m, c);
  if (!ins) {
    it->second += c;
    if (it->second == cplx(0)) terms.erase(it);
  }
}

PolyField& PolyField::operator+=(const PolyField& o) {
  for (const auto& [m, c] : o.terms) add(m, c);
  return *this;
}

PolyField PolyField::mul_phi(int k) const {
  PolyField r{weight, {}};
  for (const auto& [m, c] : terms) {
    Monomial nm = m;
    ++nm[k];
    r.add(nm, c);
  }
  return r;
}

PolyField PolyField::deriv(int k) const {
  PolyField r{weight, {}};
  for (const auto& [m, c] : terms) {
    auto it = m.find(k);
    if (it == m.end()) continue;
    Monomial nm = m;
    const int e = it->second;
    if (e == 1) nm.erase(k);
    else nm[k] = e - 1;
    r.add(nm, c * static_cast<double>(e));
  }
  return r;
}

int PolyField::degree() const {
  int d = 0;
  for (const auto& [m, c] : terms) {
    int s = 0;
    for (const auto& [k, e] : m) s += e;
    d = std::max(d, s);
  }
  return d;
}

namespace {

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

cplx PolyField::eval(const std::vector<cplx>& phi) const {
  cplx s = 0;
  for (const auto& [m, c] : terms) {
    cplx t = c;
    for (const auto& [k, e] : m) {
      const int a = std::abs(k);
      if (a >= static_cast<int>(phi.size())) throw PreconditionError("PolyField::eval: mode beyond supplied cutoff");
      t *= std::pow(k > 0 ? phi[a] : std::conj(phi[a]), e);
    }
    s += t;
  }
  return s;
}

PolyField apply_A_poly(int n, const PolyField& f, bool tilde) {
  if (n == 0) throw PreconditionError("apply_A_poly: zero mode acts on the c weight");
  if (n > 0) {
    PolyField d = f.deriv(tilde ? -n : n);
    for (auto& [m, c] : d.terms) c *= I / 2.0;
    return d;
  }
  const int k = -n;
  PolyField r = f.mul_phi(tilde ? -k : k);
  for (auto& [m, c] : r.terms) c *= -I * static_cast<double>(k);
  PolyField d = f.deriv(tilde ? k : -k);
  for (auto& [m, c] : d.terms) c *= I / 2.0;
  r += d;
  return r;
}

namespace {

PolyField create(int n, const PolyField& f, bool tilde) { return apply_A_poly(-n, f, tilde); }

}  // namespace

PolyField realize(const FockState& s) {
  PolyField out{s.alpha - s.Q, {}};
  for (const auto& [k, c] : s.terms) {
    PolyField f{out.weight, {}};
    f.add({}, c);
    // creation modes commute; apply in any order
    for (int part : k.second.parts()) f = create(part, f, true);
    for (int part : k.first.parts()) f = create(part, f, false);
    out += f;
  }
  return out;
}

cplx wick_pair(const PolyField& u, const PolyField& v) {
  cplx total = 0;
  for (const auto& [mu, cu] : u.terms)
    for (const auto& [mv, cv] : v.terms) {
      // conj maps phi_k -> phi_{-k}
      Monomial m = mu;
      for (const auto& [k, e] : mv) m[-k] += e;
      double val = 1;
      for (const auto& [k, e] : m) {
        if (k < 0) continue;
        auto it = m.find(-k);
        const int f = it == m.end() ? 0 : it->second;
        if (f != e) { val = 0; break; }
        val *= factorial(e) * std::pow(1.0 / (2.0 * k), e);
      }
      if (val != 0)
        for (const auto& [k, e] : m)
          if (k < 0 && !m.count(-k)) { val = 0; break; }
      total += cu * std::conj(cv) * val;
    }
  return total;
}

cplx gram_pair(const FockState& u, const FockState& v) { return wick_pair(realize(u), realize(v)); }

Eigen::MatrixXcd gram(const Params& p, double P, int level, int max_level) {
  if (level < 0 || level > max_level) throw PreconditionError("gram: level outside [0, max_level]");
  const auto basis = enumerate(level);
  const cplx alpha(p.Q, P);
  std::vector<PolyField> polys;
  for (const auto& nu : basis) polys.push_back(realize(descendant(p, alpha, nu, YoungDiagram{})));
  const int n = basis.size();
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = wick_pair(polys[i], polys[j]);
  return g;
}

nlohmann::json to_json(const FockState& s) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [k, c] : s.terms)
    terms.push_back({{"nu", k.first.parts()}, {"nutilde", k.second.parts()}, {"coeff", {c.real(), c.imag()}}});
  return {{"alpha", {s.alpha.real(), s.alpha.imag()}}, {"terms", terms}};
}

}  // namespace lcft
