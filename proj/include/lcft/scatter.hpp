#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "lcft/model.hpp"
#include "lcft/partitions.hpp"

namespace lcft {

// log Gamma(z) (Lanczos, reflected for Re z < 1/2). The imaginary part is
// only defined modulo 2 pi.
cplx log_gamma_complex(cplx z);
cplx gamma_complex(cplx z);

struct ReflectionParams {
  double gamma = 1, mu = 1;
  double Q() const { return background_charge(gamma); }
};

// R(alpha) with x = Q - alpha:
// -(pi mu G(g^2/4) / G(1 - g^2/4))^{2x/g} G(-g x/2) G(-2x/g) / (G(g x/2) G(2x/g))
cplx reflection(cplx alpha, double gamma, double mu);
double functional_equation_residual(cplx alpha, double gamma, double mu);

// Level-l block of the scattering operator at Q + iP: the scalar R(Q + iP)
// times the involution sending the label (nu, nu~) at weight Q + iP to the
// same label at Q - iP.
struct ScatteringBlock {
  int level = 0;
  cplx scalar;
  cplx weight_in, weight_out;
  std::vector<std::pair<YoungDiagram, YoungDiagram>> labels;
  Eigen::MatrixXd involution;  // in the label basis
};

ScatteringBlock scattering_block(double P, int level, double gamma, double mu);
// The block at the flipped weight Q - iP.
ScatteringBlock flip(const ScatteringBlock& b, double gamma, double mu);

// Header re_alpha,im_alpha,re_R,im_R,abs_R. Rows at poles are written as nan.
std::string reflection_table_csv(const std::vector<cplx>& alphas, double gamma, double mu);

}  // namespace lcft
