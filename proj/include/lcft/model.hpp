#pragma once

#include <complex>

namespace lcft {

using cplx = std::complex<double>;

inline double background_charge(double gamma) { return gamma / 2 + 2 / gamma; }
inline double central_charge(double gamma) {
  const double q = background_charge(gamma);
  return 1 + 6 * q * q;
}
// Delta_alpha = (alpha/2)(Q - alpha/2)
inline cplx conformal_weight(cplx alpha, double Q) { return alpha / 2.0 * (Q - alpha / 2.0); }

}  // namespace lcft
