#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace skewlink {

inline constexpr const char* kVersion = "0.1.0";

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::MatrixXi;

// Bad user input: malformed files, inconsistent dimensions, out-of-range
// parameters. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: non-PD matrices beyond the jitter budget, degenerate
// truncations, failed factorizations. CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Cholesky with escalating diagonal jitter. Starts at 1e-10*trace/d and
// escalates x10 at most `max_escalations` times before giving up.
// Returns the lower factor of (A + jitter*I).
Matrix jittered_cholesky(const Matrix& a, int max_escalations = 3);

// Symmetric PSD square root by eigendecomposition. Eigenvalues in
// [-tol, 0) are clamped to zero; below -tol is an error.
Matrix symmetric_sqrt(const Matrix& a, double tol = 1e-10);

}  // namespace skewlink
