#pragma once

#include "skewlink/common.hpp"
#include "skewlink/mvprob.hpp"

#include <cstdint>

namespace skewlink {

enum class Kernel { normal, student };

namespace skewdist {

// SE_d(xi, Sigma, alpha) with a normal or Student-t density generator.
struct SkewEllipticalParams {
  Vector xi;
  Matrix sigma;
  Vector alpha;
  Kernel kernel = Kernel::normal;
  double nu = 0.0;  // required when kernel == student
};

// SUE_{d,m}(xi, Sigma, Lambda, tau, Gamma): Lambda is m x d, Gamma an
// m x m correlation matrix.
struct UnifiedSkewParams {
  Vector xi;
  Matrix sigma;
  Matrix lambda;
  Vector tau;
  Matrix gamma;
  Kernel kernel = Kernel::normal;
  double nu = 0.0;
};

// delta = (1 + a'Sb a)^{-1/2} Sb a for a correlation matrix Sb.
Vector delta_from_alpha(const Vector& alpha, const Matrix& sigma_bar);

// True iff sigma_bar is numerically PD and sigma_bar - delta*delta' stays
// numerically PD (min eigenvalue > 1e-10). Never throws.
bool admissible(const Matrix& sigma_bar, const Vector& alpha);

double mvn_logpdf(const Vector& z, const Matrix& sigma);
double mvt_logpdf(const Vector& z, const Matrix& sigma, double nu);

double sn_pdf(const Vector& x, const SkewEllipticalParams& params);
double st_pdf(const Vector& x, const SkewEllipticalParams& params);

// F(x) = 2 G_{d+1}((0, x-xi); Sigma_*) with the delta-bordered scale matrix.
mvprob::ProbEstimate se_cdf(const Vector& x, const SkewEllipticalParams& params,
                            const mvprob::QmcConfig& config, std::uint64_t seed);

double sun_pdf(const Vector& x, const UnifiedSkewParams& params,
               const mvprob::QmcConfig& config, std::uint64_t seed);
double sut_pdf(const Vector& x, const UnifiedSkewParams& params,
               const mvprob::QmcConfig& config, std::uint64_t seed);

// Exact samplers via the convolution representation; one row per draw.
Matrix sample_sn(const SkewEllipticalParams& params, std::size_t count,
                 std::uint64_t seed);
Matrix sample_st(const SkewEllipticalParams& params, std::size_t count,
                 std::uint64_t seed);

}  // namespace skewdist
}  // namespace skewlink
