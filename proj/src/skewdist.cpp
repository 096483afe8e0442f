#include "skewlink/skewdist.hpp"

#include "skewlink/rng.hpp"
#include "skewlink/specfun.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace skewlink::skewdist {

namespace {

void validate_se(const SkewEllipticalParams& p) {
  const int d = static_cast<int>(p.xi.size());
  if (d < 1 || p.sigma.rows() != d || p.sigma.cols() != d || p.alpha.size() != d)
    throw ValidationError("skewdist: inconsistent parameter dimensions");
  if (p.kernel == Kernel::student && !(p.nu > 0.0))
    throw ValidationError("invalid df");
}

Vector sd_of(const Matrix& sigma) { return sigma.diagonal().cwiseSqrt(); }

Matrix corr_of(const Matrix& sigma) {
  const Vector s = sd_of(sigma);
  return s.cwiseInverse().asDiagonal() * sigma * s.cwiseInverse().asDiagonal();
}

}  // namespace

Vector delta_from_alpha(const Vector& alpha, const Matrix& sigma_bar) {
  if (sigma_bar.rows() != alpha.size())
    throw ValidationError("delta_from_alpha: dimension mismatch");
  Eigen::LLT<Matrix> llt(sigma_bar);
  if (llt.info() != Eigen::Success) throw NumericalError("not positive definite");
  const Vector sa = sigma_bar * alpha;
  return sa / std::sqrt(1.0 + alpha.dot(sa));
}

bool admissible(const Matrix& sigma_bar, const Vector& alpha) {
  try {
    if (sigma_bar.rows() != sigma_bar.cols() || sigma_bar.rows() != alpha.size())
      return false;
    if (!sigma_bar.isApprox(sigma_bar.transpose(), 1e-10)) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_bar);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-10)
      return false;
    const Vector delta = delta_from_alpha(alpha, sigma_bar);
    Eigen::SelfAdjointEigenSolver<Matrix> es2(sigma_bar -
                                              delta * delta.transpose());
    return es2.info() == Eigen::Success && es2.eigenvalues().minCoeff() > 1e-10;
  } catch (...) {
    return false;
  }
}

double mvn_logpdf(const Vector& z, const Matrix& sigma) {
  const int d = static_cast<int>(z.size());
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("not positive definite");
  const Vector half = llt.matrixL().solve(z);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  return -0.5 * d * std::log(2.0 * M_PI) - logdet - 0.5 * half.squaredNorm();
}

double mvt_logpdf(const Vector& z, const Matrix& sigma, double nu) {
  if (!(nu > 0.0)) throw ValidationError("invalid df");
  const int d = static_cast<int>(z.size());
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("not positive definite");
  const Vector half = llt.matrixL().solve(z);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  const double q = half.squaredNorm();
  return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
         0.5 * d * std::log(nu * M_PI) - logdet -
         0.5 * (nu + d) * std::log1p(q / nu);
}

double sn_pdf(const Vector& x, const SkewEllipticalParams& params) {
  validate_se(params);
  const Vector z = x - params.xi;
  const double skew = params.alpha.dot(sd_of(params.sigma).cwiseInverse().cwiseProduct(z));
  return 2.0 * std::exp(mvn_logpdf(z, params.sigma)) * norm_cdf(skew);
}

double st_pdf(const Vector& x, const SkewEllipticalParams& params) {
  validate_se(params);
  if (params.kernel != Kernel::student) throw ValidationError("st_pdf: student kernel required");
  const int d = static_cast<int>(x.size());
  const double nu = params.nu;
  const Vector z = x - params.xi;
  Eigen::LLT<Matrix> llt(params.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("not positive definite");
  const double q = llt.matrixL().solve(z).squaredNorm();
  const double skew = params.alpha.dot(sd_of(params.sigma).cwiseInverse().cwiseProduct(z));
  const double scaled = skew * std::sqrt((nu + d) / (q + nu));
  return 2.0 * std::exp(mvt_logpdf(z, params.sigma, nu)) *
         student_t_cdf(scaled, nu + d);
}

mvprob::ProbEstimate se_cdf(const Vector& x, const SkewEllipticalParams& params,
                            const mvprob::QmcConfig& config, std::uint64_t seed) {
  validate_se(params);
  const int d = static_cast<int>(x.size());
  const Vector sd = sd_of(params.sigma);
  const Vector delta = delta_from_alpha(params.alpha, corr_of(params.sigma));

  Matrix star(d + 1, d + 1);
  star(0, 0) = 1.0;
  star.block(0, 1, 1, d) = -(sd.cwiseProduct(delta)).transpose();
  star.block(1, 0, d, 1) = -sd.cwiseProduct(delta);
  star.block(1, 1, d, d) = params.sigma;

  Vector upper(d + 1);
  upper[0] = 0.0;
  upper.tail(d) = x - params.xi;

  mvprob::ProbEstimate est;
  if (params.kernel == Kernel::normal) {
    mvprob::GaussianProblem pb{upper, star, Vector()};
    est = mvprob::mvn_cdf(pb, config, seed);
  } else {
    mvprob::StudentProblem pb;
    pb.upper = upper;
    pb.covariance = star;
    pb.df = params.nu;
    est = mvprob::mvt_cdf(pb, config, seed);
  }
  est.value = std::clamp(2.0 * est.value, 0.0, 1.0);
  est.error *= 2.0;
  return est;
}

namespace {

void validate_sue(const UnifiedSkewParams& p) {
  const int d = static_cast<int>(p.xi.size());
  const int m = static_cast<int>(p.tau.size());
  if (d < 1 || m < 1 || p.sigma.rows() != d || p.sigma.cols() != d ||
      p.lambda.rows() != m || p.lambda.cols() != d || p.gamma.rows() != m ||
      p.gamma.cols() != m)
    throw ValidationError("skewdist: inconsistent SUE parameter dimensions");
  if (p.kernel == Kernel::student && !(p.nu > 0.0))
    throw ValidationError("invalid df");
  for (int i = 0; i < m; ++i) {
    if (std::fabs(p.gamma(i, i) - 1.0) > 1e-8)
      throw ValidationError("skewdist: Gamma must have unit diagonal");
  }
}

}  // namespace

double sun_pdf(const Vector& x, const UnifiedSkewParams& params,
               const mvprob::QmcConfig& config, std::uint64_t seed) {
  validate_sue(params);
  const Vector z = x - params.xi;
  const Vector sd = sd_of(params.sigma);
  const Vector arg = params.tau + params.lambda * sd.cwiseInverse().cwiseProduct(z);
  const Matrix denom_cov =
      params.gamma + params.lambda * corr_of(params.sigma) * params.lambda.transpose();

  mvprob::GaussianProblem num_pb{arg, params.gamma, Vector()};
  mvprob::GaussianProblem den_pb{params.tau, denom_cov, Vector()};
  const double num = mvprob::mvn_cdf(num_pb, config, seed).value;
  const double den = mvprob::mvn_cdf(den_pb, config, seed).value;
  if (den < 1e-300) throw NumericalError("degenerate truncation");
  return std::exp(mvn_logpdf(z, params.sigma)) * num / den;
}

double sut_pdf(const Vector& x, const UnifiedSkewParams& params,
               const mvprob::QmcConfig& config, std::uint64_t seed) {
  validate_sue(params);
  if (params.kernel != Kernel::student) throw ValidationError("sut_pdf: student kernel required");
  const int d = static_cast<int>(x.size());
  const double nu = params.nu;
  const Vector z = x - params.xi;
  const Vector sd = sd_of(params.sigma);
  Eigen::LLT<Matrix> llt(params.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("not positive definite");
  const double q = llt.matrixL().solve(z).squaredNorm();

  const double scale = std::sqrt((nu + d) / (q + nu));
  const Vector arg =
      scale * (params.tau + params.lambda * sd.cwiseInverse().cwiseProduct(z));
  const Matrix denom_cov =
      params.gamma + params.lambda * corr_of(params.sigma) * params.lambda.transpose();

  mvprob::StudentProblem num_pb;
  num_pb.upper = arg;
  num_pb.covariance = params.gamma;
  num_pb.df = nu + d;
  mvprob::StudentProblem den_pb;
  den_pb.upper = params.tau;
  den_pb.covariance = denom_cov;
  den_pb.df = nu;
  const double num = mvprob::mvt_cdf(num_pb, config, seed).value;
  const double den = mvprob::mvt_cdf(den_pb, config, seed).value;
  if (den < 1e-300) throw NumericalError("degenerate truncation");
  return std::exp(mvt_logpdf(z, params.sigma, nu)) * num / den;
}

Matrix sample_sn(const SkewEllipticalParams& params, std::size_t count,
                 std::uint64_t seed) {
  validate_se(params);
  const int d = static_cast<int>(params.xi.size());
  const Vector sd = sd_of(params.sigma);
  const Matrix sigma_bar = corr_of(params.sigma);
  const Vector delta = delta_from_alpha(params.alpha, sigma_bar);
  const Matrix root = symmetric_sqrt(sigma_bar - delta * delta.transpose());

  Matrix out(count, d);
  const CounterRng base(seed, 0);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng = base.substream(i);
    const double z0 = std::fabs(normal_draw(rng));
    Vector z(d);
    for (int j = 0; j < d; ++j) z[j] = normal_draw(rng);
    out.row(i) = (params.xi + sd.cwiseProduct(delta * z0 + root * z)).transpose();
  }
  return out;
}

Matrix sample_st(const SkewEllipticalParams& params, std::size_t count,
                 std::uint64_t seed) {
  validate_se(params);
  if (params.kernel != Kernel::student) throw ValidationError("sample_st: student kernel required");
  const int d = static_cast<int>(params.xi.size());
  const Vector sd = sd_of(params.sigma);
  const Matrix sigma_bar = corr_of(params.sigma);
  const Vector delta = delta_from_alpha(params.alpha, sigma_bar);
  const Matrix root = symmetric_sqrt(sigma_bar - delta * delta.transpose());

  Matrix out(count, d);
  const CounterRng base(seed, 0);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng = base.substream(i);
    const double z0 = std::fabs(normal_draw(rng));
    Vector z(d);
    for (int j = 0; j < d; ++j) z[j] = normal_draw(rng);
    const double w = chisq_draw(rng, params.nu);
    const Vector sn = sd.cwiseProduct(delta * z0 + root * z);
    out.row(i) = (params.xi + sn / std::sqrt(w / params.nu)).transpose();
  }
  return out;
}

}  // namespace skewlink::skewdist
