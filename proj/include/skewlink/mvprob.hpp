#pragma once

#include "skewlink/common.hpp"

#include <cstdint>
#include <vector>

namespace skewlink::mvprob {

// P(X <= upper) for X ~ N(shift, covariance). Entries of `upper` may be
// +infinity. An empty `shift` means zero.
struct GaussianProblem {
  Vector upper;
  Matrix covariance;
  Vector shift;
};

struct StudentProblem : GaussianProblem {
  double df = 1.0;
};

struct ProbEstimate {
  double value = 0.0;
  double error = 0.0;          // 3.5-sigma spread across random shifts
  std::uint64_t samples_used = 0;
};

// Randomized rank-1 lattice rule: `shifts` independent random shifts of a
// `initial_points`-point Richtmyer lattice, doubled per round until the
// error target or the evaluation cap is reached.
struct QmcConfig {
  double abs_target = 1e-4;
  double rel_target = 0.0;
  int shifts = 12;
  std::size_t initial_points = 4096;
  std::size_t max_evaluations = 10'000'000;
  int dimension_cap = 1000;
  bool parallel = true;        // OpenMP over shifts; bit-identical either way
  bool closed_forms = true;    // exact d<=2 paths instead of the lattice rule
};

struct ReorderedCholesky {
  std::vector<int> permutation;  // position -> original variable index
  Matrix lower;                  // L with L*L^T = permuted covariance
  Vector upper;                  // permuted limits
};

// Variable ordering for the separation-of-variables transform: greedily
// places the most restrictive limit first, computing the Cholesky factor
// along the way. Throws NumericalError if the matrix is not PD.
ReorderedCholesky reorder_cholesky(const Matrix& covariance, const Vector& upper);

ProbEstimate mvn_cdf(const GaussianProblem& problem, const QmcConfig& config,
                     std::uint64_t seed);
ProbEstimate mvt_cdf(const StudentProblem& problem, const QmcConfig& config,
                     std::uint64_t seed);

// Convenience overloads: `accuracy` is the absolute 3.5-sigma target.
ProbEstimate mvn_cdf(const GaussianProblem& problem, double accuracy,
                     std::uint64_t seed);
ProbEstimate mvt_cdf(const StudentProblem& problem, double accuracy,
                     std::uint64_t seed);

// Exact-to-roundoff bivariate probabilities, P(X1 <= b1, X2 <= b2) under a
// standardized correlation-rho pair.
double bvn_cdf(double b1, double b2, double rho);
double bvt_cdf(double b1, double b2, double rho, double nu);

}  // namespace skewlink::mvprob
