#pragma once

#include <stdexcept>
#include <string>

namespace lcft {

// Caller supplied something outside an operation's domain.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A well-posed computation failed numerically.
struct ComputationError : std::runtime_error {
  ComputationError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

inline ComputationError singular_matrix(const std::string& w) { return {"singular_matrix", w}; }
inline ComputationError step_failure(const std::string& w) { return {"step_failure", w}; }
inline ComputationError domain_escape(const std::string& w) { return {"domain_escape", w}; }
inline ComputationError non_convergence(const std::string& w) { return {"non_convergence", w}; }
inline ComputationError quadrature_error(const std::string& w) { return {"quadrature_nonconvergence", w}; }
inline ComputationError pole_error(const std::string& w) { return {"pole", w}; }
inline ComputationError cholesky_failure(const std::string& w) { return {"cholesky_failure", w}; }
inline ComputationError grid_too_dense(const std::string& w) { return {"grid_too_dense", w}; }
inline ComputationError singular_kernel(const std::string& w) { return {"singular_kernel", w}; }
inline ComputationError no_interior_zero(const std::string& w) { return {"no_interior_zero", w}; }

}  // namespace lcft
