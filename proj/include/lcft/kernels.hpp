#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lcft/flow.hpp"
#include "lcft/fock.hpp"

namespace lcft {

// log|1 - z conj(w)| - log|z - w|
double green_disk(cplx z, cplx w);

struct CovarianceOptions {
  int M = 1024;        // circle nodes; the Richardson partner uses M/2
  double tol = 1e-8;   // allowed |C_M - C_{M/2}|
  FlowOptions flow{};
};

// C(n, m) = E[X_n(s) conj(X_m(t))], modes -N..N, where X_n(t) are the
// Fourier modes of X_D o f_t on the circle and X_0(t) = B_t.
struct ModeCovariance {
  int N = 0;
  double s = 0, t = 0;
  Eigen::MatrixXcd C;
  double quad_error = 0;
  cplx at(int n, int m) const { return C(n + N, m + N); }
};

ModeCovariance mode_covariance(const VectorField& v, double s, double t, int N, const CovarianceOptions& opt = {});

// d/dt C_{t,t}(p, q) at t = 0, by the residue expansion of the three kernels.
cplx hpq(const VectorField& v, int p, int q);
// Second-order one-sided difference (4 C(eps) - C(2 eps)) / (2 eps) of mode_covariance.
Eigen::MatrixXcd hpq_finite_difference(const VectorField& v, int N, double eps = 1e-4,
                                       const CovarianceOptions& opt = {});

struct XhKernel {
  int N = 0;
  Eigen::MatrixXcd gram;  // nonzero modes -N..-1, 1..N
  Eigen::MatrixXcd W;     // smooth part, same indexing
  double rho = 0;
  double min_eigenvalue = 0;
  std::vector<int> modes() const;
};

// Fourier Gram matrix of -log|h(e^{i th}) - h(e^{i th'})|, split as the
// multiplier pi/|n| plus the smooth part W. h_data.grid must be circle_nodes(M).
XhKernel xh_kernel(const HData& h_data, int N);

// Smooth factor of the c dependence with analytic derivatives.
struct CFactor {
  enum Kind { Exponential, Bump } kind = Exponential;
  double beta = 0;  // Exponential: e^{beta c}
  double L = 1;     // Bump: (1 - (c/L)^2)^k on |c| < L
  int k = 4;
  static CFactor exponential(double beta) { return {Exponential, beta, 1, 0}; }
  static CFactor bump(double L, int k) { return {Bump, 0, L, k}; }
  double deriv(int d, double c) const;
};

// sum coeff * phi^monomial * (d/dc)^d chi(c)
struct CPoly {
  std::map<std::pair<Monomial, int>, cplx> terms;

  static CPoly from_poly(const PolyField& p);
  void add(const Monomial& m, int d, cplx c);
  CPoly& operator+=(const CPoly& o);
  CPoly operator*(cplx s) const;
  cplx eval(const CFactor& chi, double c, const std::vector<cplx>& phi) const;
  // Collapse onto e^{beta c}: every d/dc becomes beta.
  PolyField collapse(cplx beta) const;
  int max_mode() const;
  double max_abs() const;
};

// H F = omega (Q^2/2) F + sum_n (v_n grad+_n + conj(v_n) grad-_n) F - (1/2) sum_{p,q} h_{pq} d_p d_{-q} F
// with grad+_n = (nQ/2) d_n + sum_{m>=1} m phi_m d_{n+m} and d_0 = d/dc.
CPoly apply_generator(const VectorField& v, double Q, const CPoly& F);

// Row/column headers are mode indices.
std::string matrix_csv(const Eigen::MatrixXcd& m, const std::vector<int>& modes);
nlohmann::json matrix_json(const Eigen::MatrixXcd& m, const std::vector<int>& modes);

}  // namespace lcft
