#ifndef CVXGEO_SELFCHECK_HPP
#define CVXGEO_SELFCHECK_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cvx {

// One end-to-end check of the library against a property it promises:
// certified ceilings, closed-form agreement, exact replays, determinism.
struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;         // what was measured, with the worst value seen
  double sample_value = 0.0;  // representative numeric; varies with the seed
};

struct SelfcheckOptions {
  std::uint64_t seed = 2026;
  int pairs_2d = 100;          // random positioning pairs in the plane
  int pairs_3d = 30;           // and in dimension three
  int stability_instances = 50;  // jittered near-extremal pipeline runs
  int fd_points = 10;          // gradient spot checks
  double tol_distance = 1e-5;  // ceiling / equality tolerance
};

// Runs the nine criteria in order and returns one result per criterion.
// Progress lines ("[PASS] ...", one per criterion, with timing) stream to
// `log` when given. Invalid options (nonpositive tolerance or counts) raise
// DomainError before any work starts. The same options and seed always
// reproduce the same pass/fail pattern and byte-identical detail strings.
std::vector<CriterionResult> run_selfcheck(const SelfcheckOptions& options = {},
                                           std::ostream* log = nullptr);

}  // namespace cvx

#endif  // CVXGEO_SELFCHECK_HPP
