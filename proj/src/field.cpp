#include "lcft/field.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "lcft/errors.hpp"

namespace lcft {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Eigen::VectorXd normals(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = g(rng);
  return z;
}

// Fourier coefficients j = 0..N of samples on circle_nodes(M).
std::vector<cplx> fourier(const std::vector<cplx>& g, int N) {
  const int M = g.size();
  std::vector<cplx> c(N + 1, 0);
  for (int j = 0; j <= N; ++j) {
    cplx s = 0;
    for (int a = 0; a < M; ++a) s += g[a] * std::polar(1.0, -2 * kPi * ((static_cast<long>(j) * a) % M) / M);
    c[j] = s / static_cast<double>(M);
  }
  return c;
}

// Ray casting against a closed polygon.
bool inside(const std::vector<cplx>& poly, cplx p) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const cplx a = poly[i], b = poly[j];
    if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
      const double x = (b.real() - a.real()) * (p.imag() - a.imag()) / (b.imag() - a.imag()) + a.real();
      if (p.real() < x) in = !in;
    }
  }
  return in;
}

// -log max(|w - z|, eps) + log|1 - conj(w) z|: G_D(w, .) averaged over the eps-circle at z.
double green_circle_avg(cplx w, cplx z, double eps) {
  return std::log(std::abs(1.0 - std::conj(w) * z)) - std::log(std::max(std::abs(w - z), eps));
}

}  // namespace

double CircleField::value(double theta) const {
  double s = c;
  for (int n = 1; n <= N(); ++n) s += 2 * (phi[n] * std::polar(1.0, n * theta)).real();
  return s;
}

std::mt19937_64 RngStreams::stream(const std::string& name, std::uint64_t block) const {
  std::uint64_t x = splitmix64(seed_ ^ splitmix64(fnv1a(name) ^ splitmix64(block)));
  std::vector<std::uint32_t> words;
  for (int i = 0; i < 4; ++i) {
    x = splitmix64(x);
    words.push_back(static_cast<std::uint32_t>(x));
    words.push_back(static_cast<std::uint32_t>(x >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

CircleField sample_phi(int N, std::mt19937_64& rng) {
  if (N < 0) throw PreconditionError("sample_phi: N must be non-negative");
  std::normal_distribution<double> g;
  CircleField f(N);
  for (int n = 1; n <= N; ++n) {
    const double x = g(rng), y = g(rng);
    f.phi[n] = cplx(x, y) / (2 * std::sqrt(static_cast<double>(n)));
  }
  return f;
}

double harmonic_extension(const CircleField& phi, cplx z) {
  if (std::abs(z) > 1) throw PreconditionError("harmonic_extension: point outside the disk");
  double s = phi.c;
  cplx zn = 1;
  for (int n = 1; n <= phi.N(); ++n) {
    zn *= z;
    s += 2 * (phi.phi[n] * zn).real();
  }
  return s;
}

Eigen::MatrixXd real_mode_covariance(const Eigen::MatrixXcd& C, int N) {
  auto at = [&](int n, int m) { return C(n + N, m + N); };
  // full (a_0..a_N, b_0..b_N), then drop b_0
  Eigen::MatrixXd F(2 * N + 2, 2 * N + 2);
  for (int n = 0; n <= N; ++n)
    for (int m = 0; m <= N; ++m) {
      const cplx xxb = at(n, m), xx = at(n, -m);
      F(n, m) = 0.5 * (xxb + xx).real();
      F(N + 1 + n, N + 1 + m) = 0.5 * (xxb - xx).real();
      F(n, N + 1 + m) = 0.5 * (xx.imag() - xxb.imag());
      F(N + 1 + n, m) = 0.5 * (xx.imag() + xxb.imag());
    }
  Eigen::MatrixXd S(2 * N + 1, 2 * N + 1);
  auto idx = [&](int i) { return i <= N ? i : i + 1; };
  for (int i = 0; i < 2 * N + 1; ++i)
    for (int j = 0; j < 2 * N + 1; ++j) S(i, j) = F(idx(i), idx(j));
  return (S + S.transpose()) / 2;
}

Eigen::MatrixXd cholesky_factor(const Eigen::MatrixXd& S, double jitter, const std::string& who) {
  if (S.rows() == 0) return S;
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const double scale = std::max(1.0, S.diagonal().cwiseAbs().maxCoeff());
  Eigen::MatrixXd J = S;
  J.diagonal().array() += jitter * scale;
  llt.compute(J);
  if (llt.info() != Eigen::Success) throw cholesky_failure(who + ": covariance is not positive definite");
  return llt.matrixL();
}

// ---- process ----

ProcessSampler::ProcessSampler(const VectorField& v, double t, int N, double Q, const ProcessOptions& opt)
    : N_(N), t_(t) {
  if (N < 0) throw PreconditionError("ProcessSampler: N must be non-negative");
  if (t < 0) throw PreconditionError("ProcessSampler: t must be non-negative");
  if (opt.M < 512) throw PreconditionError("ProcessSampler: need M >= 512");
  A_ = Eigen::MatrixXcd::Zero(N + 1, N + 1);
  shift_.assign(N + 1, 0);
  cov_ = Eigen::MatrixXd::Zero(2 * N + 1, 2 * N + 1);
  L_ = cov_;
  if (t == 0) {
    for (int n = 1; n <= N; ++n) A_(n, n) = 1;
    return;
  }
  const auto z = circle_nodes(opt.M);
  const auto f = integrate_batch(v, t, z, opt.cov.flow);
  std::vector<cplx> pw(opt.M, 1.0), lg(opt.M);
  for (int k = 1; k <= N; ++k) {
    for (int a = 0; a < opt.M; ++a) pw[a] *= f[a].f;
    const auto c = fourier(pw, N);
    for (int n = k; n <= N; ++n) A_(n, k) = c[n];
  }
  for (int a = 0; a < opt.M; ++a) lg[a] = Q * (std::log(std::abs(f[a].df)) - std::log(std::abs(f[a].f)));
  shift_ = fourier(lg, N);
  shift_[0] = 0;  // log|f'(z) z / f(z)| is harmonic with value 0 at the origin
  const auto C = mode_covariance(v, t, t, N, opt.cov);
  cov_ = real_mode_covariance(C.C, N);
  L_ = cholesky_factor(cov_, opt.jitter, "ProcessSampler");
}

std::pair<double, CircleField> ProcessSampler::mean(const CircleField& phi) const {
  CircleField out(N_);
  for (int n = 1; n <= N_; ++n) {
    cplx s = shift_[n];
    for (int k = 1; k <= std::min(n, phi.N()); ++k) s += A_(n, k) * phi.phi[k];
    out.phi[n] = s;
  }
  out.c = phi.c;
  return {0.0, out};
}

std::pair<double, CircleField> ProcessSampler::draw(const CircleField& phi, const Eigen::VectorXd& z) const {
  auto [b, out] = mean(phi);
  if (t_ == 0) {
    for (int n = 1; n <= std::min(N_, phi.N()); ++n) out.phi[n] = phi.phi[n];
    return {0.0, out};
  }
  const Eigen::VectorXd y = L_ * z;
  b += y[0];
  for (int n = 1; n <= N_; ++n) out.phi[n] += cplx(y[n], y[N_ + n]);
  return {b, out};
}

std::pair<double, CircleField> ProcessSampler::sample(const CircleField& phi, std::mt19937_64& rng) const {
  return draw(phi, normals(dim(), rng));
}

std::pair<double, CircleField> sample_process(const VectorField& v, double t, const CircleField& phi, double Q,
                                              std::mt19937_64& rng, int N) {
  return ProcessSampler(v, t, N < 0 ? phi.N() : N, Q).sample(phi, rng);
}

// ---- disk ----

DiskGrid make_disk_grid(int n_r, double r_in, double r_out, int k_max) {
  if (n_r < 1 || !(r_in >= 0) || !(r_out > r_in) || r_out > 1 || k_max < 4)
    throw PreconditionError("make_disk_grid: need n_r >= 1 and 0 <= r_in < r_out <= 1");
  DiskGrid g;
  g.dr = (r_out - r_in) / n_r;
  g.eps = g.dr / 3;
  for (int i = 0; i < n_r; ++i) {
    const double a = r_in + i * g.dr, b = a + g.dr, rc = (a + b) / 2;
    const int K = std::clamp(static_cast<int>(std::lround(2 * kPi * rc / g.dr)), 4, k_max);
    for (int k = 0; k < K; ++k) {
      const double t0 = 2 * kPi * k / K, t1 = 2 * kPi * (k + 1) / K;
      g.cells.push_back({std::polar(rc, (t0 + t1) / 2), a, b, t0, t1});
    }
  }
  // regularization circles must be disjoint
  double dmin = 1e300;
  for (std::size_t i = 0; i < g.cells.size(); ++i)
    for (std::size_t j = i + 1; j < g.cells.size(); ++j)
      dmin = std::min(dmin, std::abs(g.cells[i].center - g.cells[j].center));
  if (g.cells.size() > 1 && dmin < 2 * g.eps)
    throw grid_too_dense("make_disk_grid: cell spacing below twice the regularization scale");
  return g;
}

double cell_weight(const DiskCell& c, double p) {
  const double dth = c.th_out - c.th_in, e = 2 - p;
  if (std::abs(e) < 1e-14) {
    if (c.r_in == 0) throw PreconditionError("cell_weight: weight not integrable at the origin");
    return dth * std::log(c.r_out / c.r_in);
  }
  if (e < 0 && c.r_in == 0) throw PreconditionError("cell_weight: weight not integrable at the origin");
  return dth * (std::pow(c.r_out, e) - std::pow(c.r_in, e)) / e;
}

Eigen::MatrixXd disk_covariance(const DiskGrid& g) {
  const int K = g.size();
  Eigen::MatrixXd S(K, K);
  for (int i = 0; i < K; ++i) {
    const cplx zi = g.cells[i].center;
    S(i, i) = std::log(1 / g.eps) + std::log(1 - std::norm(zi));
    for (int j = 0; j < i; ++j) S(i, j) = S(j, i) = green_disk(zi, g.cells[j].center);
  }
  return S;
}

DiskGffSampler::DiskGffSampler(const DiskGrid& g) : grid_(g) {
  const Eigen::MatrixXd S = disk_covariance(g);
  var_ = S.diagonal();
  try {
    L_ = cholesky_factor(S, 1e-12, "DiskGffSampler");
  } catch (const ComputationError&) {
    throw grid_too_dense("DiskGffSampler: grid covariance is not positive definite");
  }
}

DiskSample DiskGffSampler::sample(std::mt19937_64& rng) const {
  return {L_ * normals(L_.cols(), rng), grid_.eps};
}

Eigen::MatrixXd DiskGffSampler::sample_batch(int count, std::mt19937_64& rng) const {
  std::normal_distribution<double> g;
  Eigen::MatrixXd Z(L_.cols(), count);
  for (int j = 0; j < count; ++j)
    for (int i = 0; i < Z.rows(); ++i) Z(i, j) = g(rng);
  return L_ * Z;
}

DiskSample sample_disk_gff(const DiskGrid& g, std::mt19937_64& rng) { return DiskGffSampler(g).sample(rng); }

double harmonic_variance(cplx z, int N) {
  const double r2 = std::norm(z);
  if (N < 0) return -std::log(1 - r2);
  double s = 0, p = 1;
  for (int n = 1; n <= N; ++n) {
    p *= r2;
    s += p / n;
  }
  return s;
}

double gmc_integral(const DiskGrid& g, const Eigen::Ref<const Eigen::VectorXd>& X, const Eigen::VectorXd& var_x,
                    const std::vector<double>& harmonic, const std::vector<double>& var_harmonic,
                    const std::vector<char>& mask, double gamma, double p) {
  double s = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double h = harmonic.empty() ? 0 : harmonic[i], vh = var_harmonic.empty() ? 0 : var_harmonic[i];
    s += cell_weight(g.cells[i], p) * std::exp(gamma * (X[i] + h) - gamma * gamma / 2 * (var_x[i] + vh));
  }
  return s;
}

// ---- Monte Carlo ----

Estimate mc_blocks(const RngStreams& rs, const std::string& stream, long n, int block, int workers,
                   const std::function<std::vector<double>(std::uint64_t, int, std::mt19937_64&)>& fn) {
  if (n < 2) throw PreconditionError("mc_blocks: need at least two samples");
  if (block < 1) throw PreconditionError("mc_blocks: block size must be positive");
  const long nb = (n + block - 1) / block;
  std::vector<double> s1(nb), s2(nb);
  std::atomic<long> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto work = [&] {
    for (long b; (b = next++) < nb;) {
      try {
        const int count = static_cast<int>(std::min<long>(block, n - b * block));
        auto rng = rs.stream(stream, b);
        const auto vals = fn(b, count, rng);
        double a = 0, q = 0;
        for (double x : vals) {
          a += x;
          q += x * x;
        }
        s1[b] = a;
        s2[b] = q;
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!err) err = std::current_exception();
        next = nb;
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, nb));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < w; ++i) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
  double a = 0, q = 0;
  for (long b = 0; b < nb; ++b) {
    a += s1[b];
    q += s2[b];
  }
  Estimate e;
  e.n = n;
  e.mean = a / n;
  const double var = std::max(0.0, (q - n * e.mean * e.mean) / (n - 1));
  e.se = std::sqrt(var / n);
  return e;
}

JointSampler::JointSampler(const VectorField& v, double t, int N, double Q, int n_r, int k_max,
                           const ProcessOptions& opt)
    : proc_(v, t, N, Q, opt) {
  if (!(t > 0)) throw PreconditionError("JointSampler: t must be positive");
  const auto z = circle_nodes(opt.M);
  const auto f = integrate_batch(v, t, z, opt.cov.flow);
  std::vector<cplx> curve(opt.M);
  double rmin = 1;
  for (int a = 0; a < opt.M; ++a) {
    curve[a] = f[a].f;
    rmin = std::min(rmin, std::abs(f[a].f));
  }
  grid_ = make_disk_grid(n_r, std::min(rmin, 1 - 1e-6), 1.0, k_max);
  for (const auto& c : grid_.cells) mask_.push_back(!inside(curve, c.center));

  const int T = proc_.dim(), K = grid_.size();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(T + K, T + K);
  S.topLeftCorner(T, T) = proc_.real_covariance();
  S.bottomRightCorner(K, K) = disk_covariance(grid_);
  cell_var_ = S.bottomRightCorner(K, K).diagonal();
  // E[X_n(t) Y_a] = (1/M) sum_j e^{-i n th_j} G_D(f_t(e^{i th_j}), x_a)
  for (int a = 0; a < K; ++a) {
    std::vector<cplx> g(opt.M);
    for (int j = 0; j < opt.M; ++j) g[j] = green_circle_avg(curve[j], grid_.cells[a].center, grid_.eps);
    const auto c = fourier(g, N);
    S(T + a, 0) = S(0, T + a) = c[0].real();
    for (int n = 1; n <= N; ++n) {
      S(T + a, n) = S(n, T + a) = c[n].real();
      S(T + a, N + n) = S(N + n, T + a) = c[n].imag();
    }
  }
  try {
    L_ = cholesky_factor(S, opt.jitter, "JointSampler");
  } catch (const ComputationError&) {
    throw grid_too_dense("JointSampler: joint covariance is not positive definite");
  }
}

Estimate estimate_Pt(const Observable& F, const VectorField& v, double t, double mu, double gamma, double c,
                     const CircleField& phi, const RngStreams& rs, const PtOptions& opt) {
  if (t < 0) throw PreconditionError("estimate_Pt: t must be non-negative");
  if (mu < 0) throw PreconditionError("estimate_Pt: mu must be non-negative");
  if (!(gamma > 0 && gamma < 2)) throw PreconditionError("estimate_Pt: gamma must lie in (0, 2)");
  const double Q = background_charge(gamma);
  const double weight = t == 0 ? 1.0 : std::pow(std::abs(integrate(v, t, 0.0).df), Q * Q / 2);
  const bool anti = opt.mc.antithetic;
  const long n_vals = anti ? std::max<long>(2, opt.mc.n_samples / 2) : opt.mc.n_samples;
  CircleField start = phi;
  start.c = c;

  Estimate e;
  if (mu == 0 || t == 0) {
    const ProcessSampler ps(v, t, opt.N, Q, opt.process);
    e = mc_blocks(rs, "field.pt", n_vals, opt.mc.block, opt.mc.workers,
                  [&](std::uint64_t, int count, std::mt19937_64& rng) {
                    std::vector<double> out;
                    out.reserve(count);
                    for (int i = 0; i < count; ++i) {
                      const Eigen::VectorXd z = normals(ps.dim(), rng);
                      auto one = [&](const Eigen::VectorXd& zz) {
                        const auto [b, f] = ps.draw(start, zz);
                        return F(c + b, f);
                      };
                      out.push_back(weight * (anti ? 0.5 * (one(z) + one(-z)) : one(z)));
                    }
                    return out;
                  });
  } else {
    const JointSampler js(v, t, opt.N, Q, opt.n_r, opt.k_max, opt.process);
    const auto& g = js.grid();
    std::vector<double> harm(g.size()), vh(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) {
      harm[a] = harmonic_extension(phi, g.cells[a].center) - phi.c;
      vh[a] = harmonic_variance(g.cells[a].center, phi.N());
    }
    const int T = js.process().dim(), K = g.size();
    const double pref = mu * std::exp(gamma * c);
    e = mc_blocks(rs, "field.pt", n_vals, opt.mc.block, opt.mc.workers,
                  [&](std::uint64_t, int count, std::mt19937_64& rng) {
                    std::vector<double> out;
                    out.reserve(count);
                    for (int i = 0; i < count; ++i) {
                      const Eigen::VectorXd z = normals(js.dim(), rng);
                      auto one = [&](const Eigen::VectorXd& zz) {
                        const Eigen::VectorXd y = js.draw(zz);
                        auto [b, f] = js.process().mean(start);
                        b += y[0];
                        for (int n = 1; n <= opt.N; ++n) f.phi[n] += cplx(y[n], y[opt.N + n]);
                        const double m = gmc_integral(g, y.segment(T, K), js.cell_variance(), harm, vh, js.annulus(),
                                                      gamma, gamma * Q);
                        return F(c + b, f) * std::exp(-pref * m);
                      };
                      out.push_back(weight * (anti ? 0.5 * (one(z) + one(-z)) : one(z)));
                    }
                    return out;
                  });
  }
  e.n = anti ? 2 * n_vals : n_vals;
  return e;
}

// ---- invariant law ----

InvariantSampler::InvariantSampler(const VectorField& v, int N, double Q, int M) : N_(N) {
  if (N < 1) throw PreconditionError("InvariantSampler: N must be positive");
  const auto grid = circle_nodes(M);
  const auto hd = extract_h(v, grid);
  const auto k = xh_kernel(hd, N);
  C_ = k.gram / (2 * kPi);
  // real coordinates (Re X_1..N, Im X_1..N); gram index of mode n is N + n - 1 (n > 0), N + n (n < 0)
  auto gi = [&](int n) { return n > 0 ? N + n - 1 : N + n; };
  Eigen::MatrixXcd Cf = Eigen::MatrixXcd::Zero(2 * N + 1, 2 * N + 1);
  for (int n = -N; n <= N; ++n)
    for (int m = -N; m <= N; ++m)
      if (n && m) Cf(n + N, m + N) = C_(gi(n), gi(m));
  const Eigen::MatrixXd R = real_mode_covariance(Cf, N);
  L_ = cholesky_factor(R.bottomRightCorner(2 * N, 2 * N), 1e-12, "InvariantSampler");
  std::vector<cplx> lv(M);
  for (int a = 0; a < M; ++a) lv[a] = -Q * std::log(std::abs(v(grid[a])));
  shift_ = fourier(lv, N);
}

CircleField InvariantSampler::draw(const Eigen::VectorXd& z) const {
  const Eigen::VectorXd y = L_ * z;
  CircleField f(N_);
  for (int n = 1; n <= N_; ++n) f.phi[n] = shift_[n] + cplx(y[n - 1], y[N_ + n - 1]);
  return f;
}

CircleField InvariantSampler::sample(std::mt19937_64& rng) const { return draw(normals(dim(), rng)); }

CircleField sample_invariant(const VectorField& v, double Q, int N, std::mt19937_64& rng) {
  return InvariantSampler(v, N, Q).sample(rng);
}

// ---- chaos masses ----

PsiEstimate psi_alpha_estimate(double c, const CircleField& phi, double alpha, double gamma, double mu,
                               const RngStreams& rs, const PsiOptions& opt) {
  if (!(gamma > 0 && gamma < 2)) throw PreconditionError("psi_alpha_estimate: gamma must lie in (0, 2)");
  const double Q = background_charge(gamma);
  if (!(alpha < Q)) throw PreconditionError("psi_alpha_estimate: need alpha < Q");
  if (mu < 0) throw PreconditionError("psi_alpha_estimate: mu must be non-negative");
  const DiskGffSampler ds(make_disk_grid(opt.n_r));
  const auto& g = ds.grid();
  std::vector<double> harm(g.size()), vh(g.size());
  for (std::size_t a = 0; a < g.size(); ++a) {
    harm[a] = harmonic_extension(phi, g.cells[a].center) - phi.c;
    vh[a] = harmonic_variance(g.cells[a].center, opt.N_phi);
  }
  const double pref = mu * std::exp(gamma * c);
  const Estimate inner = mc_blocks(rs, "field.psi", opt.mc.n_samples, opt.mc.block, opt.mc.workers,
                                   [&](std::uint64_t, int count, std::mt19937_64& rng) {
                                     const Eigen::MatrixXd X = ds.sample_batch(count, rng);
                                     std::vector<double> out(count);
                                     for (int j = 0; j < count; ++j)
                                       out[j] = std::exp(-pref * gmc_integral(g, X.col(j), ds.variance(), harm, vh, {},
                                                                               gamma, gamma * alpha));
                                     return out;
                                   });
  const double s = std::exp((alpha - Q) * c);
  PsiEstimate r;
  r.scaled = inner;
  r.psi = {inner.mean * s, inner.se * s, inner.n};
  return r;
}

GmcMeanResult gmc_mean_mass(double gamma, double alpha, long n_samples, int N_phi, const RngStreams& rs,
                            int n_r_start, int n_r_max, int workers) {
  if (!(gamma * alpha < 2)) throw PreconditionError("gmc_mean_mass: need gamma alpha < 2");
  GmcMeanResult res;
  res.exact = 2 * kPi / (2 - gamma * alpha);
  for (int n_r = n_r_start; n_r <= n_r_max; n_r *= 2) {
    const DiskGffSampler ds(make_disk_grid(n_r));
    const auto& g = ds.grid();
    std::vector<double> vh(g.size());
    for (std::size_t a = 0; a < g.size(); ++a) vh[a] = harmonic_variance(g.cells[a].center, N_phi);
    const Estimate e =
        mc_blocks(rs, "field.gmc." + std::to_string(n_r), n_samples, 256, workers,
                  [&](std::uint64_t, int count, std::mt19937_64& rng) {
                    const Eigen::MatrixXd X = ds.sample_batch(count, rng);
                    std::vector<double> out(count), harm(g.size());
                    for (int j = 0; j < count; ++j) {
                      const CircleField phi = sample_phi(N_phi, rng);
                      for (std::size_t a = 0; a < g.size(); ++a) harm[a] = harmonic_extension(phi, g.cells[a].center);
                      out[j] = gmc_integral(g, X.col(j), ds.variance(), harm, vh, {}, gamma, gamma * alpha);
                    }
                    return out;
                  });
    const bool settled = !res.history.empty() && std::abs(e.mean - res.history.back().second.mean) < e.se;
    res.history.emplace_back(n_r, e);
    res.estimate = e;
    res.n_r = n_r;
    if (settled) break;
  }
  return res;
}

}  // namespace lcft
