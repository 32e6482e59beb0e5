#include "lcft/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lcft/errors.hpp"

namespace lcft {

namespace {

constexpr double kPi = std::numbers::pi;

// Twiddles e^{sign 2 pi i j a / M} for j in [-N, N] (column j+N), a in [0, M).
Eigen::MatrixXcd twiddles(int M, int N, int sign) {
  Eigen::MatrixXcd E(M, 2 * N + 1);
  for (int a = 0; a < M; ++a)
    for (int j = -N; j <= N; ++j) {
      const long r = ((static_cast<long>(j) * a) % M + M) % M;
      E(a, j + N) = std::polar(1.0, sign * 2 * kPi * r / M);
    }
  return E;
}

// Fourier coefficients j = 0..N of samples on circle_nodes(M).
std::vector<cplx> dft_coeffs(const std::vector<cplx>& g, int N) {
  const int M = g.size();
  std::vector<cplx> c(N + 1, 0);
  for (int j = 0; j <= N; ++j) {
    cplx s = 0;
    for (int a = 0; a < M; ++a) {
      const long r = (static_cast<long>(j) * a) % M;
      s += g[a] * std::polar(1.0, -2 * kPi * r / M);
    }
    c[j] = s / static_cast<double>(M);
  }
  return c;
}

// (1/M^2) sum_{a,b} e^{-i n th_a} e^{i m th_b} K_ab for n, m in [-N, N].
Eigen::MatrixXcd double_dft(const Eigen::MatrixXd& K, int N) {
  const int M = K.rows();
  const Eigen::MatrixXcd Ep = twiddles(M, N, +1), Em = twiddles(M, N, -1);
  const Eigen::MatrixXcd R = K.cast<cplx>() * Ep;  // sum_b K_ab e^{i m th_b}
  return Em.transpose() * R / (static_cast<double>(M) * M);
}

Eigen::MatrixXd even_subgrid(const Eigen::MatrixXd& K) {
  const int M2 = K.rows() / 2;
  Eigen::MatrixXd S(M2, M2);
  for (int a = 0; a < M2; ++a)
    for (int b = 0; b < M2; ++b) S(a, b) = K(2 * a, 2 * b);
  return S;
}

}  // namespace

double green_disk(cplx z, cplx w) {
  const double d = std::abs(z - w);
  if (d == 0) throw PreconditionError("green_disk: coincident points");
  if (std::abs(z) > 1 + 1e-12 || std::abs(w) > 1 + 1e-12) throw PreconditionError("green_disk: point outside the disk");
  return std::log(std::abs(1.0 - z * std::conj(w))) - std::log(d);
}

ModeCovariance mode_covariance(const VectorField& v, double s_in, double t_in, int N, const CovarianceOptions& opt) {
  if (s_in < 0 || t_in < 0) throw PreconditionError("mode_covariance: times must be non-negative");
  if (N < 0) throw PreconditionError("mode_covariance: N must be non-negative");
  if (opt.M < 512 || opt.M % 2) throw PreconditionError("mode_covariance: need an even M >= 512");
  if (!(markov_check(v) > 0)) throw PreconditionError("mode_covariance: vector field is not Markovian");
  ModeCovariance out;
  out.N = N;
  out.s = s_in;
  out.t = t_in;
  const int D = 2 * N + 1;
  out.C = Eigen::MatrixXcd::Zero(D, D);
  const bool swapped = s_in > t_in;
  const double s = std::min(s_in, t_in), t = std::max(s_in, t_in);
  if (s == 0) return out;  // X vanishes on the unit circle

  const int M = opt.M;
  const auto z = circle_nodes(M);
  const auto fs = integrate_batch(v, s, z, opt.flow);
  const auto ft = t == s ? fs : integrate_batch(v, t, z, opt.flow);
  const auto u = t == s ? std::vector<FlowPoint>{} : integrate_batch(v, t - s, z, opt.flow);
  auto uval = [&](int b) { return t == s ? z[b] : u[b].f; };

  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(D, D);
  auto at = [&](int n, int m) -> cplx& { return C(n + N, m + N); };

  // log|1 - f_s(z) conj f_t(w)| = -Re sum_k (f_s(z) conj f_t(w))^k / k
  std::vector<cplx> ps(M, 1), pt(M, 1), pu(M, 1);
  std::vector<std::vector<cplx>> cs(N + 1), ct(N + 1), cu(N + 1);
  for (int k = 1; k <= N; ++k) {
    for (int a = 0; a < M; ++a) {
      ps[a] *= fs[a].f;
      pt[a] *= ft[a].f;
      pu[a] *= uval(a);
    }
    cs[k] = dft_coeffs(ps, N);
    ct[k] = dft_coeffs(pt, N);
    cu[k] = dft_coeffs(pu, N);
  }
  for (int n = 1; n <= N; ++n)
    for (int m = 1; m <= N; ++m) {
      cplx b = 0;
      for (int k = 1; k <= std::min(n, m); ++k) b -= cs[k][n] * std::conj(ct[k][m]) / static_cast<double>(k);
      at(n, m) += b / 2.0;
      at(-n, -m) += std::conj(b) / 2.0;
    }
  // -log|z - u(w)| = Re sum_k (u(w)/z)^k / k on |z| = 1
  for (int k = 1; k <= N; ++k)
    for (int j = k; j <= N; ++j) {
      at(-k, -j) += cu[k][j] / (2.0 * k);
      at(k, j) += std::conj(cu[k][j]) / (2.0 * k);
    }
  // smooth remainder -log|D|, D = (f_s(z) - f_t(w)) / (z - u(w))
  Eigen::MatrixXd K(M, M);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      const cplx den = z[a] - uval(b);
      cplx Dv;
      if (std::abs(den) < 1e-9) Dv = fs[a].df;
      else Dv = (fs[a].f - ft[b].f) / den;
      const double ad = std::abs(Dv);
      if (!(ad > 0)) throw quadrature_error("mode_covariance: degenerate difference quotient");
      K(a, b) = -std::log(ad);
    }
  const Eigen::MatrixXcd Cf = double_dft(K, N), Ch = double_dft(even_subgrid(K), N);
  out.quad_error = (Cf - Ch).cwiseAbs().maxCoeff();
  if (out.quad_error > opt.tol)
    throw quadrature_error("mode_covariance: Richardson estimate " + std::to_string(out.quad_error) +
                           " exceeds tolerance");
  C += Cf;

  if (swapped) {
    // C_{s,t}(n, m) = C_{t,s}(-m, -n)
    for (int n = -N; n <= N; ++n)
      for (int m = -N; m <= N; ++m) out.C(n + N, m + N) = C(-m + N, -n + N);
  } else {
    out.C = C;
  }
  return out;
}

cplx hpq(const VectorField& v, int p, int q) {
  // The residues of the three kernels tile the integers: for each n >= 0,
  // v_n lands on (p, p - n) from log|1 - z conj w| when 0 <= p <= n, from the
  // conjugated pole of -log|z - w| when p < 0 and from the difference
  // quotient when p > n; conj(v_n) lands on (p, p + n) symmetrically. Each
  // contributes exactly 1/2.
  cplx h = 0;
  for (int n = 0; n <= v.degree(); ++n) {
    if (q == p - n) h += v.v[n] / 2.0;
    if (q == p + n) h += std::conj(v.v[n]) / 2.0;
  }
  return h;
}

Eigen::MatrixXcd hpq_finite_difference(const VectorField& v, int N, double eps, const CovarianceOptions& opt) {
  const auto c1 = mode_covariance(v, eps, eps, N, opt), c2 = mode_covariance(v, 2 * eps, 2 * eps, N, opt);
  return (4.0 * c1.C - c2.C) / (2 * eps);
}

std::vector<int> XhKernel::modes() const {
  std::vector<int> m;
  for (int n = -N; n <= N; ++n)
    if (n) m.push_back(n);
  return m;
}

XhKernel xh_kernel(const HData& hd, int N) {
  const int M = hd.grid.size();
  if (M < 64 || M % 2) throw PreconditionError("xh_kernel: need h on an even number (>= 64) of circle nodes");
  const auto nodes = circle_nodes(M);
  for (int a = 0; a < M; ++a)
    if (std::abs(hd.grid[a] - nodes[a]) > 1e-14)
      throw PreconditionError("xh_kernel: h_data grid must be circle_nodes(M)");
  Eigen::MatrixXd K(M, M);
  double min_d = INFINITY;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      const cplx Dv = a == b ? hd.dh[a] : (hd.h[a] - hd.h[b]) / (nodes[a] - nodes[b]);
      const double ad = std::abs(Dv);
      min_d = std::min(min_d, ad);
      K(a, b) = ad > 0 ? -std::log(ad) : 0;
    }
  if (min_d < 1e-10) throw singular_kernel("xh_kernel: h is not injective on the sampled boundary");

  const Eigen::MatrixXcd full = double_dft(K, N);
  XhKernel out;
  out.N = N;
  const auto modes = out.modes();
  const int D = modes.size();
  out.W.resize(D, D);
  out.gram.resize(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      const int n = modes[i], m = modes[j];
      out.W(i, j) = full(n + N, m + N);
      out.gram(i, j) = 2 * kPi * (out.W(i, j) + (n == m ? 1.0 / (2.0 * std::abs(n)) : 0.0));
    }
  const Eigen::MatrixXcd herm = (out.gram + out.gram.adjoint()) / 2.0;
  out.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm).eigenvalues().minCoeff();

  // rho from the decay of max |W| over shells |n| + |m| = const
  std::map<int, double> shell;
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      const int sh = std::abs(modes[i]) + std::abs(modes[j]);
      shell[sh] = std::max(shell[sh], std::abs(out.W(i, j)));
    }
  std::vector<std::pair<double, double>> pts;
  for (const auto& [sh, w] : shell)
    if (w > 1e-13) pts.emplace_back(sh, std::log(w));
  if (pts.size() < 2) {
    out.rho = 0;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = pts.size();
    out.rho = std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
  }
  return out;
}

// ---- generator ----

double CFactor::deriv(int d, double c) const {
  if (kind == Exponential) return std::pow(beta, d) * std::exp(beta * c);
  const double x = c / L;
  if (std::abs(x) >= 1) return 0;
  // (1 - x^2)^k = sum_j binom(k, j) (-1)^j x^{2j}
  double s = 0, binom = 1;
  for (int j = 0; j <= k; ++j) {
    const int e = 2 * j;
    if (e >= d) {
      double fall = 1;
      for (int i = 0; i < d; ++i) fall *= e - i;
      s += ((j % 2) ? -1.0 : 1.0) * binom * fall * std::pow(x, e - d);
    }
    binom = binom * (k - j) / (j + 1);
  }
  return s / std::pow(L, d);
}

CPoly CPoly::from_poly(const PolyField& p) {
  CPoly r;
  for (const auto& [m, c] : p.terms) r.add(m, 0, c);
  return r;
}

void CPoly::add(const Monomial& m, int d, cplx c) {
  if (c == cplx(0)) return;
  auto [it, ins] = terms.try_emplace({m, d}, c);
  if (!ins) {
    it->second += c;
    if (it->second == cplx(0)) terms.erase(it);
  }
}

CPoly& CPoly::operator+=(const CPoly& o) {
  for (const auto& [k, c] : o.terms) add(k.first, k.second, c);
  return *this;
}

CPoly CPoly::operator*(cplx s) const {
  CPoly r;
  for (const auto& [k, c] : terms) r.add(k.first, k.second, c * s);
  return r;
}

cplx CPoly::eval(const CFactor& chi, double c, const std::vector<cplx>& phi) const {
  std::map<int, double> dcache;
  cplx s = 0;
  for (const auto& [k, coef] : terms) {
    auto it = dcache.find(k.second);
    if (it == dcache.end()) it = dcache.emplace(k.second, chi.deriv(k.second, c)).first;
    if (it->second == 0) continue;
    cplx t = coef * it->second;
    for (const auto& [mode, e] : k.first) {
      const int a = std::abs(mode);
      if (a >= static_cast<int>(phi.size())) throw PreconditionError("CPoly::eval: mode beyond supplied cutoff");
      t *= std::pow(mode > 0 ? phi[a] : std::conj(phi[a]), e);
    }
    s += t;
  }
  return s;
}

PolyField CPoly::collapse(cplx beta) const {
  PolyField p{beta, {}};
  for (const auto& [k, c] : terms) p.add(k.first, c * std::pow(beta, k.second));
  return p;
}

int CPoly::max_mode() const {
  int m = 0;
  for (const auto& [k, c] : terms)
    for (const auto& [mode, e] : k.first) m = std::max(m, std::abs(mode));
  return m;
}

double CPoly::max_abs() const {
  double m = 0;
  for (const auto& [k, c] : terms) m = std::max(m, std::abs(c));
  return m;
}

namespace {

// d_k with d_0 = d/dc
CPoly dmode(const CPoly& F, int k) {
  CPoly r;
  for (const auto& [key, c] : F.terms) {
    const auto& [m, d] = key;
    if (k == 0) {
      r.add(m, d + 1, c);
      continue;
    }
    auto it = m.find(k);
    if (it == m.end()) continue;
    Monomial nm = m;
    const int e = it->second;
    if (e == 1) nm.erase(k);
    else nm[k] = e - 1;
    r.add(nm, d, c * static_cast<double>(e));
  }
  return r;
}

CPoly mul_phi(const CPoly& F, int k) {
  CPoly r;
  for (const auto& [key, c] : F.terms) {
    Monomial nm = key.first;
    ++nm[k];
    r.add(nm, key.second, c);
  }
  return r;
}

// grad+_n (sign = +1) or its conjugate grad-_n (sign = -1)
CPoly grad(const CPoly& F, int n, double Q, int sign, int K) {
  CPoly r;
  if (n) r += dmode(F, sign * n) * (n * Q / 2.0);
  for (int m = 1; n + m <= K; ++m) {
    const CPoly d = dmode(F, sign * (n + m));
    if (!d.terms.empty()) r += mul_phi(d, sign * m) * static_cast<double>(m);
  }
  return r;
}

}  // namespace

CPoly apply_generator(const VectorField& v, double Q, const CPoly& F) {
  if (v.v_minus1 != cplx(0)) throw PreconditionError("apply_generator: need v_{-1} = 0");
  const int K = F.max_mode();
  CPoly r = F * (v.omega() * Q * Q / 2);
  for (int n = 0; n <= v.degree(); ++n) {
    if (v.v[n] == cplx(0)) continue;
    r += grad(F, n, Q, +1, K) * v.v[n];
    r += grad(F, n, Q, -1, K) * std::conj(v.v[n]);
  }
  for (int p = -K; p <= K; ++p)
    for (int q = -K; q <= K; ++q) {
      const cplx h = hpq(v, p, q);
      if (h == cplx(0)) continue;
      r += dmode(dmode(F, p), -q) * (-0.5 * h);
    }
  return r;
}

std::string matrix_csv(const Eigen::MatrixXcd& m, const std::vector<int>& modes) {
  std::ostringstream os;
  os.precision(17);
  os << "part,mode";
  for (int q : modes) os << ',' << q;
  os << '\n';
  for (int part = 0; part < 2; ++part)
    for (int i = 0; i < m.rows(); ++i) {
      os << (part ? "im" : "re") << ',' << modes[i];
      for (int j = 0; j < m.cols(); ++j) os << ',' << (part ? m(i, j).imag() : m(i, j).real());
      os << '\n';
    }
  return os.str();
}

nlohmann::json matrix_json(const Eigen::MatrixXcd& m, const std::vector<int>& modes) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<double> r, c;
    for (int j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return {{"modes", modes}, {"re", re}, {"im", im}};
}

}  // namespace lcft
