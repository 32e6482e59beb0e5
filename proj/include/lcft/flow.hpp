#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lcft/model.hpp"

namespace lcft {

// v(z) = -sum_{n=-1}^{N} v_n z^{n+1}.  Markovian fields used downstream have
// v_{-1} = 0 and v_0 = omega > 0; v_{-1} is kept only so that fields with a
// displaced zero can be fed to normalize_fixed_point.
struct VectorField {
  std::vector<cplx> v;  // v[n] = v_n, n = 0..N
  cplx v_minus1 = 0;

  VectorField() = default;
  explicit VectorField(std::vector<cplx> coeffs, cplx vm1 = 0) : v(std::move(coeffs)), v_minus1(vm1) {}

  int degree() const { return static_cast<int>(v.size()) - 1; }
  double omega() const { return v.empty() ? 0.0 : v[0].real(); }
  cplx coeff(int n) const;  // v_n, zero outside the stored range
  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;
  std::string str() const;
};

// min over theta of Re sum_n v_n e^{i n theta} = min of -Re(conj(z) v(z)), |z| = 1.
double markov_check(const VectorField& v, int n_samples = 1024);
// Sampled margin minus the Lipschitz slack sum |n||v_n| * (half node spacing);
// a positive value proves Re(conj(z) v(z)) < 0 on the whole circle.
double markov_certificate(const VectorField& v, int n_samples = 1024);
// omega > K sum_{n>=1} |v_n| n^2
bool omega_condition(const VectorField& v, double K = 8.0);

struct FlowOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_steps = 1000000;
};

struct FlowPoint {
  cplx f, df;
};

FlowPoint integrate(const VectorField& v, double t, cplx z, const FlowOptions& opt = {});
// All points share one adaptive step sequence.
std::vector<FlowPoint> integrate_batch(const VectorField& v, double t, const std::vector<cplx>& z,
                                       const FlowOptions& opt = {});

struct TrajectoryRow {
  double t;
  cplx z0, f, df;
};
std::vector<TrajectoryRow> trajectory(const VectorField& v, const std::vector<double>& times,
                                      const std::vector<cplx>& z0, const FlowOptions& opt = {});
std::string trajectory_csv(const std::vector<TrajectoryRow>& rows);

struct HData {
  VectorField v;
  std::vector<cplx> grid, h, dh;
  std::vector<cplx> taylor;  // h = sum_m taylor[m] z^m
  double t_final = 0;
  double last_change = 0;
};

struct ExtractOptions {
  double tol = 1e-10;
  double delta = 1.0;
  double t_max_factor = 60.0;  // t_max = factor / omega
  int taylor_order = 16;
  double cauchy_radius = 0.8;
  int cauchy_nodes = 128;
  FlowOptions flow{};
};

// Limit of e^{omega t} f_t and its derivative on the grid, plus Taylor data.
HData extract_h(const VectorField& v, const std::vector<cplx>& grid, const ExtractOptions& opt = {});

// Taylor coefficients of h from omega h = -h' v order by order.
std::vector<cplx> h_taylor_recursive(const VectorField& v, int order);

// max_z |omega h(z) + h'(z) v(z)| over the stored grid.
double h_equation_residual(const HData& h);

double flow_identity_residual(const VectorField& v, double t, const std::vector<cplx>& grid,
                              const FlowOptions& opt = {});

// Zero of v inside the open disk.
cplx interior_zero(const VectorField& v);
// Conjugate v by psi(z) = (z - a)/(1 - conj(a) z); the result vanishes at 0 and
// is truncated to the degree of v.
VectorField normalize_fixed_point(const VectorField& v);

// M equispaced points e^{2 pi i k / M}.
std::vector<cplx> circle_nodes(int M, double r = 1.0);

}  // namespace lcft
