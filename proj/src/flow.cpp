#include "lcft/flow.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lcft/errors.hpp"

namespace lcft {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

cplx VectorField::coeff(int n) const {
  if (n == -1) return v_minus1;
  if (n < 0 || n > degree()) return 0;
  return v[n];
}

cplx VectorField::operator()(cplx z) const {
  // Horner on sum_{n>=0} v_n z^n, then times z.
  cplx s = 0;
  for (int n = degree(); n >= 0; --n) s = s * z + v[n];
  return -(v_minus1 + s * z);
}

cplx VectorField::derivative(cplx z) const {
  cplx s = 0;
  for (int n = degree(); n >= 0; --n) s = s * z + static_cast<double>(n + 1) * v[n];
  return -s;
}

std::string VectorField::str() const {
  std::ostringstream os;
  os << "v(z) = -(";
  bool first = true;
  for (int n = -1; n <= degree(); ++n) {
    const cplx c = coeff(n);
    if (c == cplx(0)) continue;
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i)z^" << n + 1;
  }
  if (first) os << "0";
  os << ")";
  return os.str();
}

double markov_check(const VectorField& v, int n_samples) {
  if (n_samples < 64) throw PreconditionError("markov_check: n_samples must be >= 64");
  double m = INFINITY;
  for (int k = 0; k < n_samples; ++k) {
    const double th = 2 * std::numbers::pi * k / n_samples;
    const cplx z = std::polar(1.0, th);
    m = std::min(m, -(std::conj(z) * v(z)).real());
  }
  return m;
}

double markov_certificate(const VectorField& v, int n_samples) {
  double lip = 0;
  for (int n = -1; n <= v.degree(); ++n) lip += std::abs(n) * std::abs(v.coeff(n));
  return markov_check(v, n_samples) - lip * std::numbers::pi / n_samples;
}

bool omega_condition(const VectorField& v, double K) {
  if (!(K > 0)) throw PreconditionError("omega_condition: K must be positive");
  double s = 0;
  for (int n = 1; n <= v.degree(); ++n) s += std::abs(v.v[n]) * n * n;
  return v.omega() > K * s;
}

std::vector<cplx> circle_nodes(int M, double r) {
  std::vector<cplx> z(M);
  for (int k = 0; k < M; ++k) z[k] = std::polar(r, 2 * std::numbers::pi * k / M);
  return z;
}

namespace {

// Adaptive Fehlberg 7(8) with our own step loop so that failures surface as
// typed errors instead of odeint exceptions.
template <class Sys, class Check>
void advance(Sys sys, State& x, double t0, double t1, const FlowOptions& opt, Check check) {
  if (t1 <= t0) return;
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_fehlberg78<State>());
  double t = t0, dt = std::min(0.05, t1 - t0);
  int steps = 0, fails = 0;
  while (t < t1) {
    if (t + dt > t1) dt = t1 - t;
    const double t_before = t;
    const auto res = stepper.try_step(sys, x, t, dt);
    if (res == odeint::success) {
      fails = 0;
      check(x);
      if (++steps > opt.max_steps) throw step_failure("flow integration exceeded max_steps");
      if (t1 - t < 1e-15 * std::max(1.0, t1)) t = t1;
    } else {
      if (++fails > 200 || dt < 1e-14 * std::max(1.0, t_before))
        throw step_failure("adaptive step control could not meet tolerance at t = " + std::to_string(t_before));
    }
  }
}

void require_markov(const VectorField& v, const char* who) {
  // Weakly Markovian fields (margin exactly 0 somewhere) still keep the disk invariant.
  if (markov_check(v) < -1e-12) throw PreconditionError(std::string(who) + ": vector field is not Markovian");
}

struct FlowSys {
  const VectorField* v;
  void operator()(const State& x, State& dx, double) const {
    const std::size_t n = x.size() / 4;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx f(x[4 * i], x[4 * i + 1]), df(x[4 * i + 2], x[4 * i + 3]);
      const cplx a = (*v)(f), b = v->derivative(f) * df;
      dx[4 * i] = a.real();
      dx[4 * i + 1] = a.imag();
      dx[4 * i + 2] = b.real();
      dx[4 * i + 3] = b.imag();
    }
  }
};

State pack(const std::vector<cplx>& z) {
  State x(4 * z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    x[4 * i] = z[i].real();
    x[4 * i + 1] = z[i].imag();
    x[4 * i + 2] = 1;
    x[4 * i + 3] = 0;
  }
  return x;
}

std::vector<FlowPoint> unpack(const State& x) {
  std::vector<FlowPoint> out(x.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = {cplx(x[4 * i], x[4 * i + 1]), cplx(x[4 * i + 2], x[4 * i + 3])};
  return out;
}

auto escape_check(double tol) {
  return [tol](const State& x) {
    for (std::size_t i = 0; i < x.size(); i += 4)
      if (std::hypot(x[i], x[i + 1]) > 1 + tol) throw domain_escape("flow left the closed unit disk");
  };
}

}  // namespace

std::vector<FlowPoint> integrate_batch(const VectorField& v, double t, const std::vector<cplx>& z,
                                       const FlowOptions& opt) {
  if (t < 0) throw PreconditionError("integrate: t must be >= 0");
  require_markov(v, "integrate");
  for (const cplx& p : z)
    if (std::abs(p) > 1 + 1e-12) throw PreconditionError("integrate: starting point outside the closed disk");
  State x = pack(z);
  advance(FlowSys{&v}, x, 0, t, opt, escape_check(1e-9));
  return unpack(x);
}

FlowPoint integrate(const VectorField& v, double t, cplx z, const FlowOptions& opt) {
  return integrate_batch(v, t, {z}, opt)[0];
}

std::vector<TrajectoryRow> trajectory(const VectorField& v, const std::vector<double>& times,
                                      const std::vector<cplx>& z0, const FlowOptions& opt) {
  require_markov(v, "trajectory");
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0))
    throw PreconditionError("trajectory: times must be sorted and non-negative");
  State x = pack(z0);
  std::vector<TrajectoryRow> rows;
  double tc = 0;
  for (double t : times) {
    advance(FlowSys{&v}, x, tc, t, opt, escape_check(1e-9));
    tc = t;
    const auto pts = unpack(x);
    for (std::size_t i = 0; i < z0.size(); ++i) rows.push_back({t, z0[i], pts[i].f, pts[i].df});
  }
  return rows;
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "t,re_z0,im_z0,re_f,im_f,re_df,im_df\n";
  for (const auto& r : rows)
    os << r.t << ',' << r.z0.real() << ',' << r.z0.imag() << ',' << r.f.real() << ',' << r.f.imag() << ','
       << r.df.real() << ',' << r.df.imag() << '\n';
  return os.str();
}

namespace {

// g = e^{omega t} f_t solves dg/dt = -sum_{n>=1} v_n e^{-n omega t} g^{n+1}.
struct RescaledSys {
  const VectorField* v;
  double omega;
  void operator()(const State& x, State& dx, double t) const {
    const int N = v->degree();
    std::vector<cplx> w(N + 1);
    for (int n = 1; n <= N; ++n) w[n] = v->v[n] * std::exp(-n * omega * t);
    for (std::size_t i = 0; i < x.size() / 4; ++i) {
      const cplx g(x[4 * i], x[4 * i + 1]), dg(x[4 * i + 2], x[4 * i + 3]);
      cplx a = 0, b = 0, gp = g;  // gp = g^n
      for (int n = 1; n <= N; ++n) {
        b -= w[n] * static_cast<double>(n + 1) * gp;
        gp *= g;
        a -= w[n] * gp;
      }
      b *= dg;
      dx[4 * i] = a.real();
      dx[4 * i + 1] = a.imag();
      dx[4 * i + 2] = b.real();
      dx[4 * i + 3] = b.imag();
    }
  }
};

}  // namespace

HData extract_h(const VectorField& v, const std::vector<cplx>& grid, const ExtractOptions& opt) {
  require_markov(v, "extract_h");
  if (v.v_minus1 != cplx(0) || v.v.empty() || v.v[0].imag() != 0 || v.omega() <= 0)
    throw PreconditionError("extract_h: need v_{-1} = 0 and real v_0 = omega > 0");
  const double omega = v.omega();
  const auto cauchy = circle_nodes(opt.cauchy_nodes, opt.cauchy_radius);
  std::vector<cplx> pts = grid;
  pts.insert(pts.end(), cauchy.begin(), cauchy.end());
  State x = pack(pts);
  const RescaledSys sys{&v, omega};
  const double t_max = opt.t_max_factor / omega;
  double t = 0, change = INFINITY;
  auto no_check = [](const State&) {};
  while (true) {
    State prev = x;
    advance(sys, x, t, t + opt.delta, opt.flow, no_check);
    t += opt.delta;
    change = 0;
    for (std::size_t i = 0; i < x.size(); ++i) change = std::max(change, std::abs(x[i] - prev[i]));
    if (change < opt.tol) break;
    if (t >= t_max) throw non_convergence("extract_h: e^{omega t} f_t did not settle before t_max");
  }
  const auto vals = unpack(x);
  HData out;
  out.v = v;
  out.grid = grid;
  out.t_final = t;
  out.last_change = change;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.h.push_back(vals[i].f);
    out.dh.push_back(vals[i].df);
  }
  const int K = opt.cauchy_nodes;
  out.taylor.assign(opt.taylor_order + 1, 0);
  for (int m = 0; m <= opt.taylor_order; ++m) {
    cplx s = 0;
    for (int k = 0; k < K; ++k) s += vals[grid.size() + k].f * std::polar(1.0, -2 * std::numbers::pi * m * k / K);
    out.taylor[m] = s / static_cast<double>(K) / std::pow(opt.cauchy_radius, m);
  }
  return out;
}

std::vector<cplx> h_taylor_recursive(const VectorField& v, int order) {
  const double omega = v.omega();
  std::vector<cplx> a(order + 1, 0);
  if (order >= 1) a[1] = 1;
  for (int m = 2; m <= order; ++m) {
    cplx s = 0;
    for (int n = 1; n <= std::min(v.degree(), m - 1); ++n) s += v.v[n] * static_cast<double>(m - n) * a[m - n];
    a[m] = s / (omega * (1 - m));
  }
  return a;
}

double h_equation_residual(const HData& h) {
  double r = 0;
  for (std::size_t i = 0; i < h.grid.size(); ++i)
    r = std::max(r, std::abs(h.v.omega() * h.h[i] + h.dh[i] * h.v(h.grid[i])));
  return r;
}

double flow_identity_residual(const VectorField& v, double t, const std::vector<cplx>& grid, const FlowOptions& opt) {
  const auto pts = integrate_batch(v, t, grid, opt);
  double r = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) r = std::max(r, std::abs(v(pts[i].f) - pts[i].df * v(grid[i])));
  return r;
}

namespace {

bool newton(const VectorField& v, cplx& z) {
  for (int it = 0; it < 100; ++it) {
    const cplx d = v.derivative(z);
    if (std::abs(d) < 1e-300) return false;
    const cplx step = v(z) / d;
    z -= step;
    if (!std::isfinite(z.real()) || std::abs(z) > 10) return false;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
  }
  return std::abs(v(z)) < 1e-12;
}

}  // namespace

cplx interior_zero(const VectorField& v) {
  cplx z = 0;
  if (newton(v, z) && std::abs(z) < 1) return z;
  // 32 x 32 polar grid; Newton from the best few starting points
  std::vector<std::pair<double, cplx>> starts;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      const cplx s = std::polar((i + 0.5) / 32, 2 * std::numbers::pi * j / 32);
      starts.emplace_back(std::abs(v(s)), s);
    }
  std::sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < std::min<std::size_t>(16, starts.size()); ++k) {
    cplx s = starts[k].second;
    if (newton(v, s) && std::abs(s) < 1) return s;
  }
  throw no_interior_zero("vector field has no zero inside the unit disk");
}

VectorField normalize_fixed_point(const VectorField& v) {
  const cplx a = interior_zero(v);
  if (std::abs(a) < 1e-14) {
    VectorField out = v;
    out.v_minus1 = 0;
    return out;
  }
  const double s = 1 - std::norm(a);
  const int K = 256, deg = v.degree();
  std::vector<cplx> vals(K);
  const auto w = circle_nodes(K);
  for (int k = 0; k < K; ++k) {
    const cplx den = 1.0 + std::conj(a) * w[k];
    vals[k] = den * den / s * v((w[k] + a) / den);
  }
  // v_psi(w) = -sum_{n>=-1} u_n w^{n+1}: u_n = -[w^{n+1}]
  std::vector<cplx> u(deg + 1);
  for (int n = 0; n <= deg; ++n) {
    cplx c = 0;
    for (int k = 0; k < K; ++k) c += vals[k] * std::conj(std::pow(w[k], n + 1));
    u[n] = -c / static_cast<double>(K);
  }
  return VectorField(u, 0);
}

}  // namespace lcft
