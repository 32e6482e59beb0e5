#include "lcft/verma.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <sstream>

#include "lcft/errors.hpp"

namespace lcft {

// ---- PolyDC ----

PolyDC PolyDC::constant(const mpq_class& q) { return monomial(0, 0, q); }

PolyDC PolyDC::monomial(int dDelta, int dC, const mpq_class& q) {
  PolyDC p;
  p.add_term({dDelta, dC}, q);
  return p;
}

mpq_class PolyDC::coeff(int dDelta, int dC) const {
  auto it = t_.find({dDelta, dC});
  return it == t_.end() ? mpq_class(0) : it->second;
}

void PolyDC::add_term(const Key& k, const mpq_class& q) {
  if (q == 0) return;
  auto [it, inserted] = t_.try_emplace(k, q);
  if (inserted) {
    it->second.canonicalize();
  } else {
    it->second += q;
    if (it->second == 0) t_.erase(it);
  }
}

PolyDC& PolyDC::operator+=(const PolyDC& o) {
  for (const auto& [k, q] : o.t_) add_term(k, q);
  return *this;
}

PolyDC& PolyDC::operator-=(const PolyDC& o) {
  for (const auto& [k, q] : o.t_) add_term(k, -q);
  return *this;
}

PolyDC PolyDC::operator*(const PolyDC& o) const {
  PolyDC r;
  for (const auto& [k1, q1] : t_)
    for (const auto& [k2, q2] : o.t_) r.add_term({k1.first + k2.first, k1.second + k2.second}, q1 * q2);
  return r;
}

PolyDC PolyDC::operator*(const mpq_class& q) const {
  PolyDC r;
  mpq_class qc(q);
  qc.canonicalize();
  if (qc == 0) return r;
  for (const auto& [k, c] : t_) r.t_.emplace(k, c * qc);
  return r;
}

cplx PolyDC::eval(cplx delta, cplx c) const {
  cplx s = 0;
  for (const auto& [k, q] : t_) s += q.get_d() * std::pow(delta, k.first) * std::pow(c, k.second);
  return s;
}

std::string PolyDC::str() const {
  if (t_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto it = t_.rbegin(); it != t_.rend(); ++it) {
    const auto& [k, q] = *it;
    if (!first) os << (q > 0 ? " + " : " - ");
    else if (q < 0) os << "-";
    first = false;
    mpq_class a = abs(q);
    bool unit = (a == 1) && (k.first || k.second);
    if (!unit) os << a.get_str();
    if (k.first) os << (unit ? "" : "*") << "D" << (k.first > 1 ? "^" + std::to_string(k.first) : "");
    if (k.second) os << ((unit && !k.first) ? "" : "*") << "c" << (k.second > 1 ? "^" + std::to_string(k.second) : "");
  }
  return os.str();
}

// ---- Verma vectors ----

VermaVector basis_vector(const YoungDiagram& nu) { return {{nu, PolyDC::constant(1)}}; }

void axpy(VermaVector& acc, const PolyDC& factor, const VermaVector& x) {
  if (factor.is_zero()) return;
  for (const auto& [nu, p] : x) {
    PolyDC term = p * factor;
    auto [it, inserted] = acc.try_emplace(nu, term);
    if (!inserted) {
      it->second += term;
      if (it->second.is_zero()) acc.erase(it);
    }
  }
}

bool is_zero(const VermaVector& v) {
  for (const auto& [nu, p] : v)
    if (!p.is_zero()) return false;
  return true;
}

namespace {

using VecPtr = std::shared_ptr<const VermaVector>;

std::mutex g_basis_mutex;
std::map<std::pair<int, YoungDiagram>, VecPtr> g_basis_cache;

VecPtr apply_basis(int n, const YoungDiagram& nu);

VermaVector apply_vec(int n, const VermaVector& vec) {
  VermaVector out;
  for (const auto& [nu, p] : vec) axpy(out, p, *apply_basis(n, nu));
  return out;
}

// L_n L_{-nu}|Delta>. Write L_{-nu} = L_a X with a = -nu_k; then
// L_n L_a X = L_a L_n X + (n - a) L_{n+a} X + (c/12)(n^3 - n) delta_{n,-a} X.
VermaVector compute_basis(int n, const YoungDiagram& nu) {
  VermaVector out;
  if (nu.empty()) {
    if (n < 0) out.emplace(YoungDiagram({-n}), PolyDC::constant(1));
    else if (n == 0) out.emplace(nu, PolyDC::delta());
    return out;
  }
  if (n < 0 && -n <= nu.last()) {
    out.emplace(nu.append(-n), PolyDC::constant(1));
    return out;
  }
  if (n == 0) {
    out.emplace(nu, PolyDC::delta() + PolyDC::constant(nu.size()));
    return out;
  }
  const int a = -nu.last();
  const YoungDiagram x = nu.pop();
  const VecPtr lnx = apply_basis(n, x);
  out = apply_vec(a, *lnx);
  axpy(out, PolyDC::constant(n - a), *apply_basis(n + a, x));
  if (n == -a) {
    mpq_class k(static_cast<long>(n) * n * n - n, 12);
    k.canonicalize();
    axpy(out, PolyDC::central() * k, basis_vector(x));
  }
  return out;
}

VecPtr apply_basis(int n, const YoungDiagram& nu) {
  auto key = std::make_pair(n, nu);
  {
    std::lock_guard<std::mutex> lk(g_basis_mutex);
    auto it = g_basis_cache.find(key);
    if (it != g_basis_cache.end()) return it->second;
  }
  auto val = std::make_shared<const VermaVector>(compute_basis(n, nu));
  std::lock_guard<std::mutex> lk(g_basis_mutex);
  return g_basis_cache.emplace(key, val).first->second;
}

std::mutex g_matrix_mutex;
std::map<std::pair<int, int>, std::unique_ptr<PolyMatrix>> g_ell_cache;
std::map<int, std::unique_ptr<PolyMatrix>> g_shap_cache;

}  // namespace

VermaVector apply_L(int n, const VermaVector& vec) { return apply_vec(n, vec); }

const PolyMatrix& ell_matrix(int n, int from_level) {
  if (from_level < 0) throw PreconditionError("ell_matrix: from_level must be >= 0");
  {
    std::lock_guard<std::mutex> lk(g_matrix_mutex);
    auto it = g_ell_cache.find({n, from_level});
    if (it != g_ell_cache.end()) return *it->second;
  }
  auto m = std::make_unique<PolyMatrix>();
  const int to_level = from_level - n;
  if (to_level >= 0) {
    const auto rows = enumerate(from_level);
    const auto cols = enumerate(to_level);
    for (const auto& nu : rows) {
      const auto img = apply_basis(n, nu);
      std::vector<PolyDC> row;
      for (const auto& mu : cols) {
        auto it = img->find(mu);
        row.push_back(it == img->end() ? PolyDC{} : it->second);
      }
      m->push_back(std::move(row));
    }
  }
  std::lock_guard<std::mutex> lk(g_matrix_mutex);
  return *g_ell_cache.emplace(std::make_pair(n, from_level), std::move(m)).first->second;
}

const PolyMatrix& shapovalov(int level) {
  if (level < 0) throw PreconditionError("shapovalov: level must be >= 0");
  {
    std::lock_guard<std::mutex> lk(g_matrix_mutex);
    auto it = g_shap_cache.find(level);
    if (it != g_shap_cache.end()) return *it->second;
  }
  const auto basis = enumerate(level);
  auto m = std::make_unique<PolyMatrix>(basis.size(), std::vector<PolyDC>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      // adjoint word L_{nu_1} ... L_{nu_k}: the smallest part acts first
      VermaVector v = basis_vector(basis[j]);
      const auto& parts = basis[i].parts();
      for (auto it = parts.rbegin(); it != parts.rend(); ++it) v = apply_vec(*it, v);
      auto f = v.find(YoungDiagram{});
      (*m)[i][j] = f == v.end() ? PolyDC{} : f->second;
    }
  }
  std::lock_guard<std::mutex> lk(g_matrix_mutex);
  return *g_shap_cache.emplace(level, std::move(m)).first->second;
}

Eigen::MatrixXcd evaluate(const PolyMatrix& m, cplx delta, cplx c) {
  const Eigen::Index rows = static_cast<Eigen::Index>(m.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(m[0].size()) : 0;
  Eigen::MatrixXcd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = m[i][j].eval(delta, c);
  return out;
}

double scaled_det(int level, cplx delta, cplx c) {
  const Eigen::MatrixXcd f = evaluate(shapovalov(level), delta, c);
  const double scale = f.cwiseAbs().maxCoeff();
  if (scale == 0) return 0;
  const Eigen::MatrixXcd g = f / scale;
  return std::abs(g.fullPivLu().determinant());
}

ShapovalovInverse shapovalov_inverse(int level, cplx delta, cplx c) {
  const Eigen::MatrixXcd f = evaluate(shapovalov(level), delta, c);
  const double scale = f.cwiseAbs().maxCoeff();
  const auto n = static_cast<double>(f.rows());
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(f);
  ShapovalovInverse out;
  out.det = lu.determinant();
  if (scale == 0 || std::abs(out.det) < 1e-10 * std::pow(scale, n))
    throw singular_matrix("Shapovalov matrix at level " + std::to_string(level) +
                          " is singular (degenerate weight)");
  out.inverse = lu.inverse();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(f);
  const auto& sv = svd.singularValues();
  out.condition = sv(0) / sv(sv.size() - 1);
  return out;
}

std::vector<DegeneratePoint> degeneracy_scan(int level, double gamma) {
  if (level < 1) throw PreconditionError("degeneracy_scan: level must be >= 1");
  if (!(gamma > 0 && gamma < 2)) throw PreconditionError("degeneracy_scan: gamma must lie in (0,2)");
  const double Q = background_charge(gamma);
  const double c = central_charge(gamma);
  std::vector<DegeneratePoint> out;
  for (int r = 1; r <= level; ++r) {
    for (int s = 1; r * s <= level; ++s) {
      for (int sign : {-1, 1}) {
        DegeneratePoint p;
        p.r = r;
        p.s = s;
        p.sign = sign;
        p.alpha = Q + sign * (r * gamma / 2 + 2.0 * s / gamma);
        p.scaled_det = scaled_det(level, conformal_weight(p.alpha, Q), c);
        p.vanishes = p.scaled_det < 1e-10;
        out.push_back(p);
      }
    }
  }
  return out;
}

double adjoint_residual(int n, int level, double P, double gamma) {
  if (n < 1) throw PreconditionError("adjoint_residual: n must be positive");
  if (level < n) return 0;
  const double Q = background_charge(gamma);
  const cplx delta = conformal_weight(cplx(Q, P), Q);
  const cplx c = central_charge(gamma);
  const Eigen::MatrixXcd Mn = evaluate(ell_matrix(n, level), delta, c).transpose();
  const Eigen::MatrixXcd Mmn = evaluate(ell_matrix(-n, level - n), delta, c).transpose();
  const Eigen::MatrixXcd Fl = evaluate(shapovalov(level), delta, c);
  const Eigen::MatrixXcd Fln = evaluate(shapovalov(level - n), delta, c);
  const Eigen::MatrixXcd r = Mn.adjoint() * Fln - Fl * Mmn;
  return r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
}

nlohmann::json to_json(const PolyDC& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [k, q] : p.terms())
    terms.push_back({{"dDelta", k.first},
                     {"dC", k.second},
                     {"num", q.get_num().get_str()},
                     {"den", q.get_den().get_str()}});
  return terms;
}

nlohmann::json matrix_to_json(const PolyMatrix& m, const std::vector<YoungDiagram>& rows,
                              const std::vector<YoungDiagram>& cols) {
  nlohmann::json j;
  auto diag = [](const std::vector<YoungDiagram>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& d : v) a.push_back(d.parts());
    return a;
  };
  j["order"] = diag(rows);
  if (cols != rows) j["col_order"] = diag(cols);
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& row : m) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& p : row) r.push_back(to_json(p));
    entries.push_back(r);
  }
  j["entries"] = entries;
  return j;
}

nlohmann::json shapovalov_json(int level) {
  const auto basis = enumerate(level);
  nlohmann::json j = matrix_to_json(shapovalov(level), basis, basis);
  j["level"] = level;
  return j;
}

}  // namespace lcft
