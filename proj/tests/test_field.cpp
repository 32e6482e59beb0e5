#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lcft/errors.hpp"
#include "lcft/field.hpp"

using namespace lcft;

namespace {
const double kPi = std::numbers::pi;
const VectorField vz({1.0});
const VectorField v213({2.0, 0.0, 1.0});

struct Moments {
  double m = 0, q = 0;
  long n = 0;
  void add(double x) {
    m += x;
    q += x * x;
    ++n;
  }
  double mean() const { return m / n; }
  double se() const { return std::sqrt(std::max(0.0, q / n - mean() * mean()) / n); }
};
}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  const RngStreams a(42), b(42), c(43);
  CHECK(a.stream("x", 3)() == b.stream("x", 3)());
  CHECK(a.stream("x", 3)() != a.stream("x", 4)());
  CHECK(a.stream("x", 3)() != a.stream("y", 3)());
  CHECK(a.stream("x", 3)() != c.stream("x", 3)());
}

TEST_CASE("sample_phi mode variances") {
  auto rng = RngStreams(1).stream("test");
  Moments m1, m3;
  for (int i = 0; i < 20000; ++i) {
    const auto f = sample_phi(3, rng);
    CHECK(f.c == 0);
    m1.add(std::norm(f.phi[1]));
    m3.add(std::norm(f.phi[3]));
  }
  CHECK(std::abs(m1.mean() - 0.5) < 4 * m1.se());
  CHECK(std::abs(m3.mean() - 1.0 / 6) < 4 * m3.se());
}

TEST_CASE("harmonic extension matches boundary values") {
  CircleField f(3);
  f.c = 0.3;
  f.phi[1] = {0.2, -0.1};
  f.phi[3] = {0.05, 0.4};
  for (double th : {0.0, 1.1, 4.0}) CHECK(std::abs(harmonic_extension(f, std::polar(1.0, th)) - f.value(th)) < 1e-14);
  CHECK(harmonic_extension(f, 0.0) == doctest::Approx(0.3));
}

TEST_CASE("process: t = 0 is the identity") {
  auto rng = RngStreams(5).stream("test");
  const auto phi = sample_phi(4, rng);
  const ProcessSampler ps(v213, 0.0, 4, 2.5);
  const auto [b, f] = ps.sample(phi, rng);
  CHECK(b == 0);
  for (int n = 1; n <= 4; ++n) CHECK(f.phi[n] == phi.phi[n]);
}

TEST_CASE("process: dilation field closed form") {
  // f_t(z) = e^{-t} z: phi_t,n = e^{-nt} phi_n + noise of variance (1 - e^{-2nt}) / (2n)
  const int N = 4;
  const double t = 0.5;
  const ProcessSampler ps(vz, t, N, 2.5);
  CircleField phi(N);
  phi.phi[2] = {0.3, -0.2};
  const auto [b, mean] = ps.mean(phi);
  CHECK(b == 0);
  for (int n = 1; n <= N; ++n) CHECK(std::abs(mean.phi[n] - std::exp(-n * t) * phi.phi[n]) < 1e-12);
  const auto& S = ps.real_covariance();
  CHECK(std::abs(S(0, 0) - t) < 1e-12);
  for (int n = 1; n <= N; ++n) {
    const double half = (1 - std::exp(-2 * n * t)) / (4.0 * n);
    CHECK(std::abs(S(n, n) - half) < 1e-12);
    CHECK(std::abs(S(N + n, N + n) - half) < 1e-12);
  }
}

TEST_CASE("process: stationarity of the free field under the dilation flow") {
  const int N = 3;
  const ProcessSampler ps(vz, 0.7, N, 2.5);
  auto rng = RngStreams(9).stream("test");
  Moments m[N + 1];
  for (int i = 0; i < 20000; ++i) {
    const auto [b, f] = ps.sample(sample_phi(N, rng), rng);
    for (int n = 1; n <= N; ++n) m[n].add(std::norm(f.phi[n]));
  }
  for (int n = 1; n <= N; ++n) CHECK(std::abs(m[n].mean() - 1.0 / (2 * n)) < 4 * m[n].se());
}

TEST_CASE("process: semigroup property in law") {
  const int N = 2;
  const double Q = 2.5;
  const ProcessSampler one(v213, 0.6, N, Q), half(v213, 0.3, N, Q);
  CircleField phi(N);
  phi.phi[1] = {0.4, 0.1};
  phi.phi[2] = {-0.2, 0.3};
  auto rng = RngStreams(11).stream("test");
  Moments b1, b2, r1, r2, v1, v2;
  for (int i = 0; i < 20000; ++i) {
    const auto [ba, fa] = one.sample(phi, rng);
    const auto [bh, fh] = half.sample(phi, rng);
    const auto [bb, fb] = half.sample(fh, rng);
    b1.add(ba * ba);
    b2.add((bh + bb) * (bh + bb));
    r1.add(fa.phi[2].real());
    r2.add(fb.phi[2].real());
    v1.add(std::norm(fa.phi[1]));
    v2.add(std::norm(fb.phi[1]));
  }
  auto close = [](const Moments& a, const Moments& b) {
    return std::abs(a.mean() - b.mean()) < 4 * std::hypot(a.se(), b.se());
  };
  CHECK(close(b1, b2));
  CHECK(close(r1, r2));
  CHECK(close(v1, v2));
  CHECK(std::abs(b1.mean() - 2 * 0.6) < 4 * b1.se());  // omega t
}

TEST_CASE("disk grid weights and covariance") {
  const auto g = make_disk_grid(8);
  double w0 = 0, w1 = 0;
  for (const auto& c : g.cells) {
    w0 += cell_weight(c, 0.0);
    w1 += cell_weight(c, 0.5);
  }
  CHECK(w0 == doctest::Approx(kPi).epsilon(1e-13));
  CHECK(w1 == doctest::Approx(2 * kPi / 1.5).epsilon(1e-13));
  const auto S = disk_covariance(g);
  CHECK(S(0, 0) == doctest::Approx(std::log(1 / g.eps) + std::log(1 - std::norm(g.cells[0].center))));
  CHECK(S(0, 5) == doctest::Approx(green_disk(g.cells[0].center, g.cells[5].center)));
  CHECK_THROWS_AS(make_disk_grid(0), PreconditionError);
  CHECK_THROWS_AS(cell_weight(g.cells[0], 2.5), PreconditionError);

  Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.size());
  CHECK(gmc_integral(g, zero, zero, {}, {}, {}, 0.3, 0.3) == doctest::Approx(2 * kPi / 1.7).epsilon(1e-13));
}

TEST_CASE("disk sampler reproduces its covariance") {
  const DiskGffSampler ds(make_disk_grid(3));
  auto rng = RngStreams(3).stream("test");
  const Eigen::MatrixXd X = ds.sample_batch(20000, rng);
  const Eigen::MatrixXd S = disk_covariance(ds.grid());
  for (int i : {0, 5, 20})
    for (int j : {0, 7, 20}) {
      Moments m;
      for (int k = 0; k < X.cols(); ++k) m.add(X(i, k) * X(j, k));
      CHECK(std::abs(m.mean() - S(i, j)) < 4 * m.se());
    }
}

TEST_CASE("gmc mean mass is unbiased") {
  const auto r = gmc_mean_mass(0.3, 1.0, 3000, 16, RngStreams(21), 5, 10);
  CHECK(r.exact == doctest::Approx(2 * kPi / 1.7));
  CHECK(std::abs(r.estimate.mean - r.exact) < 4 * r.estimate.se);
  CHECK(!r.history.empty());
}

TEST_CASE("mc_blocks does not depend on the worker count") {
  const RngStreams rs(17);
  auto fn = [](std::uint64_t, int count, std::mt19937_64& rng) {
    std::vector<double> v(count);
    std::normal_distribution<double> g;
    for (auto& x : v) x = g(rng);
    return v;
  };
  const auto a = mc_blocks(rs, "s", 5000, 64, 1, fn), b = mc_blocks(rs, "s", 5000, 64, 3, fn);
  CHECK(a.mean == b.mean);
  CHECK(a.se == b.se);
}

TEST_CASE("estimate_Pt: weight, contraction and the potential") {
  const double gamma = 1.0, Q = background_charge(gamma), t = 0.3;
  CircleField phi(3);
  phi.phi[1] = {0.2, 0.1};
  PtOptions opt;
  opt.N = 3;
  opt.mc.n_samples = 4000;
  const RngStreams rs(8);
  const auto one = estimate_Pt([](double, const CircleField&) { return 1.0; }, v213, t, 0, gamma, 0.0, phi, rs, opt);
  const double w = std::exp(-2 * t * Q * Q / 2);
  CHECK(one.mean == doctest::Approx(w).epsilon(1e-8));

  const Observable F = [](double c, const CircleField& f) { return std::exp(-std::norm(f.phi[1]) - c * c); };
  const auto free = estimate_Pt(F, v213, t, 0, gamma, 0.2, phi, rs, opt);
  CHECK(free.mean <= w + 3 * free.se);
  CHECK(free.mean > 0);
  opt.n_r = 3;
  const auto pot = estimate_Pt(F, v213, t, 5.0, gamma, 0.2, phi, rs, opt);
  CHECK(pot.mean < free.mean + 3 * std::hypot(pot.se, free.se));
  CHECK(pot.mean > 0);

  opt.mc.workers = 3;
  const auto again = estimate_Pt(F, v213, t, 5.0, gamma, 0.2, phi, rs, opt);
  CHECK(again.mean == pot.mean);
}

TEST_CASE("joint sampler annulus excludes the image of the disk") {
  const JointSampler js(v213, 0.3, 2, 2.5, 4, 128);
  int kept = 0;
  for (std::size_t a = 0; a < js.grid().size(); ++a)
    if (js.annulus()[a]) ++kept;
  CHECK(kept > 0);
  CHECK(kept < static_cast<int>(js.grid().size()));
}

TEST_CASE("invariant sampler") {
  const double Q = 2.5;
  const InvariantSampler id(vz, 4, Q);
  for (int n = 1; n <= 4; ++n) {
    CHECK(std::abs(id.shift()[n]) < 1e-12);
    CHECK(std::abs(id.mode_covariance()(4 + n - 1, 4 + n - 1) - 1.0 / (2 * n)) < 1e-9);
  }
  // log|v(e^{i th})| = log 2 + sum_k (-1)^{k+1} 2^{-k} cos(2k th) / k
  const InvariantSampler s(v213, 6, Q);
  for (int n = 1; n <= 6; ++n) {
    double e = 0;
    if (n % 2 == 0) {
      const int k = n / 2;
      e = -Q * (k % 2 ? 1.0 : -1.0) * std::pow(2.0, -k) / (2.0 * k);
    }
    CHECK(std::abs(s.shift()[n] - e) < 1e-12);
  }
  auto rng = RngStreams(2).stream("test");
  const auto f = s.sample(rng);
  CHECK(f.N() == 6);
}

TEST_CASE("psi_alpha_estimate") {
  const CircleField phi(2);
  PsiOptions opt;
  opt.n_r = 4;
  opt.mc.n_samples = 500;
  const auto free = psi_alpha_estimate(-1.0, phi, 1.0, 0.5, 0.0, RngStreams(4), opt);
  CHECK(free.scaled.mean == 1.0);
  CHECK(free.psi.mean == doctest::Approx(std::exp((1.0 - background_charge(0.5)) * -1.0)));
  const auto a = psi_alpha_estimate(-1.0, phi, 1.0, 0.5, 1.0, RngStreams(4), opt);
  const auto b = psi_alpha_estimate(-6.0, phi, 1.0, 0.5, 1.0, RngStreams(4), opt);
  CHECK(a.scaled.mean < b.scaled.mean);
  CHECK(b.scaled.mean < 1.0);
  CHECK_THROWS_AS(psi_alpha_estimate(0, phi, 5.0, 0.5, 1.0, RngStreams(4), opt), PreconditionError);
}
