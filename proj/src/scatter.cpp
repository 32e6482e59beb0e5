#include "lcft/scatter.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lcft/errors.hpp"

namespace lcft {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos coefficients, g = 671/128, 14 terms.
constexpr std::array<double, 14> kCof = {
    57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,     -0.491913816097620199,
    .339946499848118887e-4,  .465236289270485756e-4,  -.983744753048795646e-4, .158088703224912494e-3,
    -.210264441724104883e-3, .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};

bool at_pole(cplx z) {
  const double n = std::round(z.real());
  return n <= 0 && std::abs(z.imag()) < 1e-14 && std::abs(z.real() - n) < 1e-14;
}

std::string show(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

// sin(pi z) with the real part reduced first, so zeros stay accurate
cplx sin_pi(cplx z) {
  const double r = z.real() - 2 * std::round(z.real() / 2);
  return std::sin(kPi * cplx(r, z.imag()));
}

cplx lanczos(cplx x) {
  cplx tmp = x + 5.24218750;
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  cplx ser = 0.999999999999997092;
  for (int j = 0; j < 14; ++j) ser += kCof[j] / (x + static_cast<double>(j + 1));
  return tmp + std::log(2.5066282746310005 * ser / x);
}

}  // namespace

cplx log_gamma_complex(cplx z) {
  if (at_pole(z)) throw pole_error("Gamma pole at " + show(z));
  if (z.real() < 0.5) return std::log(kPi / sin_pi(z)) - lanczos(1.0 - z);
  return lanczos(z);
}

cplx gamma_complex(cplx z) {
  if (at_pole(z)) throw pole_error("Gamma pole at " + show(z));
  if (z.real() < 0.5) return kPi / (sin_pi(z) * std::exp(lanczos(1.0 - z)));
  return std::exp(lanczos(z));
}

cplx reflection(cplx alpha, double gamma, double mu) {
  if (!(gamma > 0 && gamma < 2)) throw PreconditionError("reflection: gamma must lie in (0, 2)");
  if (!(mu > 0)) throw PreconditionError("reflection: mu must be positive");
  const cplx x = background_charge(gamma) - alpha;
  if (std::abs(x) < 1e-12) return -1.0;
  const double base = kPi * mu * std::exp((log_gamma_complex(gamma * gamma / 4) - log_gamma_complex(1 - gamma * gamma / 4)).real());
  const cplx args[4] = {-gamma * x / 2.0, -2.0 * x / gamma, gamma * x / 2.0, 2.0 * x / gamma};
  for (const auto& a : args)
    if (at_pole(a)) throw pole_error("reflection: Gamma argument at a pole, " + show(a));
  const cplx l = 2.0 * x / gamma * std::log(base) + log_gamma_complex(args[0]) + log_gamma_complex(args[1]) -
                 log_gamma_complex(args[2]) - log_gamma_complex(args[3]);
  return -std::exp(l);
}

double functional_equation_residual(cplx alpha, double gamma, double mu) {
  const double Q = background_charge(gamma);
  return std::abs(reflection(alpha, gamma, mu) * reflection(2 * Q - alpha, gamma, mu) - 1.0);
}

ScatteringBlock scattering_block(double P, int level, double gamma, double mu) {
  if (!(P > 0)) throw PreconditionError("scattering_block: P must be positive");
  if (level < 0) throw PreconditionError("scattering_block: level must be non-negative");
  const double Q = background_charge(gamma);
  ScatteringBlock b;
  b.level = level;
  b.weight_in = cplx(Q, P);
  b.weight_out = cplx(Q, -P);
  b.scalar = reflection(b.weight_in, gamma, mu);
  for (int a = 0; a <= level; ++a)
    for (const auto& nu : enumerate(a))
      for (const auto& nut : enumerate(level - a)) b.labels.emplace_back(nu, nut);
  const int n = b.labels.size();
  b.involution = Eigen::MatrixXd::Identity(n, n);
  return b;
}

ScatteringBlock flip(const ScatteringBlock& b, double gamma, double mu) {
  ScatteringBlock r = b;
  std::swap(r.weight_in, r.weight_out);
  r.scalar = reflection(r.weight_in, gamma, mu);
  return r;
}

std::string reflection_table_csv(const std::vector<cplx>& alphas, double gamma, double mu) {
  std::ostringstream os;
  os.precision(17);
  os << "re_alpha,im_alpha,re_R,im_R,abs_R\n";
  for (const auto& a : alphas) {
    os << a.real() << ',' << a.imag() << ',';
    try {
      const cplx r = reflection(a, gamma, mu);
      os << r.real() << ',' << r.imag() << ',' << std::abs(r) << '\n';
    } catch (const ComputationError& e) {
      if (e.kind() != "pole") throw;
      os << "nan,nan,nan\n";
    }
  }
  return os.str();
}

}  // namespace lcft
