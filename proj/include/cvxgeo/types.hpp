#ifndef CVXGEO_TYPES_HPP
#define CVXGEO_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace cvx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Failure classes surfaced by the library. The CLI maps these onto exit
// codes: anything user-input related exits 2, anything solver related exits 3.
enum class ErrorCode {
  origin_not_interior,
  degenerate_body,
  unbounded_body,
  infeasible_start,
  solver_stall,
  no_contacts,
  not_nested,
  degenerate_simplex,
  domain_error,
  uncertified_curve,
  no_solution,
  parse_error,
  unsupported,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::origin_not_interior: return "origin_not_interior";
    case ErrorCode::degenerate_body: return "degenerate_body";
    case ErrorCode::unbounded_body: return "unbounded_body";
    case ErrorCode::infeasible_start: return "infeasible_start";
    case ErrorCode::solver_stall: return "solver_stall";
    case ErrorCode::no_contacts: return "no_contacts";
    case ErrorCode::not_nested: return "not_nested";
    case ErrorCode::degenerate_simplex: return "degenerate_simplex";
    case ErrorCode::domain_error: return "domain_error";
    case ErrorCode::uncertified_curve: return "uncertified_curve";
    case ErrorCode::no_solution: return "no_solution";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::unsupported: return "unsupported";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

// Certification level attached to computed bounds and containment answers.
enum class Cert {
  certified,
  heuristic,
};

inline const char* cert_name(Cert c) {
  return c == Cert::certified ? "certified" : "heuristic";
}

}  // namespace cvx

#endif  // CVXGEO_TYPES_HPP
