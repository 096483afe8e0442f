#include "skewlink/common.hpp"

#include <Eigen/Eigenvalues>

namespace skewlink {

Matrix jittered_cholesky(const Matrix& a, int max_escalations) {
  const int d = static_cast<int>(a.rows());
  double jitter = 0.0;
  double base = 1e-10 * a.trace() / d;
  if (base <= 0.0) base = 1e-14;
  for (int attempt = 0; attempt <= max_escalations; ++attempt) {
    Matrix m = a;
    if (jitter > 0.0) m.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    jitter = (jitter == 0.0) ? base : jitter * 10.0;
  }
  throw NumericalError("not positive definite");
}

Matrix symmetric_sqrt(const Matrix& a, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  Vector ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol) throw NumericalError("not positive semidefinite");
    if (ev[i] < 0.0) ev[i] = 0.0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace skewlink
