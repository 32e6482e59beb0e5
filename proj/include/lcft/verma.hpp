#pragma once

#include <gmpxx.h>

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lcft/model.hpp"
#include "lcft/partitions.hpp"

namespace lcft {

// Sparse polynomial in (Delta, c) with exact rational coefficients.
class PolyDC {
 public:
  using Key = std::pair<int, int>;  // (degree in Delta, degree in c)

  PolyDC() = default;
  static PolyDC constant(const mpq_class& q);
  static PolyDC monomial(int dDelta, int dC, const mpq_class& q);
  static PolyDC delta() { return monomial(1, 0, 1); }
  static PolyDC central() { return monomial(0, 1, 1); }

  const std::map<Key, mpq_class>& terms() const { return t_; }
  bool is_zero() const { return t_.empty(); }
  mpq_class coeff(int dDelta, int dC) const;

  PolyDC& operator+=(const PolyDC& o);
  PolyDC& operator-=(const PolyDC& o);
  PolyDC operator+(const PolyDC& o) const { PolyDC r = *this; return r += o; }
  PolyDC operator-(const PolyDC& o) const { PolyDC r = *this; return r -= o; }
  PolyDC operator*(const PolyDC& o) const;
  PolyDC operator*(const mpq_class& q) const;
  bool operator==(const PolyDC& o) const { return t_ == o.t_; }

  cplx eval(cplx delta, cplx c) const;
  std::string str() const;

 private:
  void add_term(const Key& k, const mpq_class& q);
  std::map<Key, mpq_class> t_;
};

// Sum_nu coeff(nu) L_{-nu}|Delta>, L_{-nu} = L_{-nu_k} ... L_{-nu_1}.
using VermaVector = std::map<YoungDiagram, PolyDC>;
using PolyMatrix = std::vector<std::vector<PolyDC>>;

VermaVector basis_vector(const YoungDiagram& nu);
void axpy(VermaVector& acc, const PolyDC& factor, const VermaVector& x);
bool is_zero(const VermaVector& v);

// Normal form of L_n applied to vec.
VermaVector apply_L(int n, const VermaVector& vec);

// Rows indexed by T_{from_level}, columns by T_{from_level - n}; entry is
// the coefficient of L_{-nu'} in L_n L_{-nu}|Delta>.
const PolyMatrix& ell_matrix(int n, int from_level);

// Gram matrix of the level-`level` basis: entry (nu, nu') is the |Delta>
// coefficient of (L_{-nu})^dagger L_{-nu'}|Delta>.
const PolyMatrix& shapovalov(int level);

Eigen::MatrixXcd evaluate(const PolyMatrix& m, cplx delta, cplx c);

struct ShapovalovInverse {
  Eigen::MatrixXcd inverse;
  double condition = 0;
  cplx det;
};
// Throws singular_matrix when |det| < 1e-10 * (max-norm)^size.
ShapovalovInverse shapovalov_inverse(int level, cplx delta, cplx c);

// |det F| / (max|F_ij|)^size at the given point; 1 for level 0.
double scaled_det(int level, cplx delta, cplx c);

struct DegeneratePoint {
  int r = 0, s = 0, sign = 0;  // alpha = Q + sign*(r*gamma/2 + 2s/gamma)
  cplx alpha;
  double scaled_det = 0;
  bool vanishes = false;
};
std::vector<DegeneratePoint> degeneracy_scan(int level, double gamma);

// max | M_n^H F_{level-n} - F_level M_{-n} | with M the operator matrices
// (transposes of ell_matrix) at alpha = Q + iP.
double adjoint_residual(int n, int level, double P, double gamma);

nlohmann::json to_json(const PolyDC& p);
nlohmann::json matrix_to_json(const PolyMatrix& m, const std::vector<YoungDiagram>& rows,
                              const std::vector<YoungDiagram>& cols);
nlohmann::json shapovalov_json(int level);

}  // namespace lcft
