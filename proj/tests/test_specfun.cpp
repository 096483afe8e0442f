#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "skewlink/common.hpp"
#include "skewlink/specfun.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace skewlink;

TEST_CASE("normal cdf basics") {
  CHECK(norm_cdf(0.0) == 0.5);
  CHECK(norm_cdf(-kInf) == 0.0);
  CHECK(norm_cdf(kInf) == 1.0);
  CHECK(norm_cdf(1.96) == doctest::Approx(0.9750021).epsilon(1e-6));
  CHECK_THROWS_AS(norm_cdf(std::nan("")), ValidationError);
}

TEST_CASE("normal cdf matches the high-precision oracle to 1e-12") {
  for (double x = -8.0; x <= 8.0; x += 0.0625) {
    const double ref = static_cast<double>(testutil::phi_oracle(x));
    CHECK(std::fabs(norm_cdf(x) - ref) <= 1e-12);
  }
}

TEST_CASE("complement identity") {
  for (double x = -12.0; x <= 12.0; x += 0.1) {
    CHECK(std::fabs(norm_cdf(x) + norm_cdf(-x) - 1.0) <= 1e-12);
  }
}

TEST_CASE("log cdf stays accurate into the deep tail") {
  for (double x : {-5.0, -10.0, -35.9, -36.1, -50.0, -100.0, -300.0}) {
    const double lc = norm_logcdf(x);
    CHECK(std::isfinite(lc));
    // compare against the asymptotic hazard bound phi(x)/(-x) (1 - 1/x^2) <= Phi(x) <= phi(x)/(-x)
    const double lpdf = -0.5 * x * x - 0.9189385332046727;
    const double ub = lpdf - std::log(-x);
    CHECK(lc <= ub + 1e-12);
    CHECK(lc >= ub + std::log1p(-1.0 / (x * x)) - 1e-9);
  }
  CHECK(norm_logcdf(-10.0) == doctest::Approx(std::log(norm_cdf(-10.0))).epsilon(1e-12));
}

TEST_CASE("normal quantile inverts the cdf") {
  CHECK(norm_quantile(0.5) == 0.0);
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  // The lower tail keeps full precision in p; the upper tail saturates in
  // double, so test it through symmetry.
  for (double x = -8.0; x <= 0.0; x += 0.25) {
    CHECK(norm_quantile(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
    CHECK(-norm_quantile(norm_cdf(x)) == doctest::Approx(-x).epsilon(1e-9));
  }
  // deep-tail round trip in probability space
  for (double p : {1e-300, 1e-100, 1e-20, 1e-10}) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(norm_quantile(-0.1), ValidationError);
}

TEST_CASE("student t cdf") {
  CHECK(student_t_cdf(0.0, 1.0) == 0.5);
  CHECK(student_t_cdf(0.0, 7.3) == 0.5);
  // Cauchy closed form: T(1; 1) = 1/2 + atan(1)/pi = 0.75
  CHECK(student_t_cdf(1.0, 1.0) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(student_t_cdf(-1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
  // converges to the normal
  CHECK(std::fabs(student_t_cdf(1.96, 1e6) - norm_cdf(1.96)) < 1e-4);
  CHECK_THROWS_AS(student_t_cdf(1.0, 0.0), ValidationError);
  CHECK_THROWS_AS(student_t_cdf(1.0, -2.0), ValidationError);
}

TEST_CASE("student t quantile inverts the cdf") {
  for (double nu : {1.0, 3.0, 5.0, 30.0}) {
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.9, 0.999}) {
      const double x = student_t_quantile(p, nu);
      CHECK(student_t_cdf(x, nu) == doctest::Approx(p).epsilon(1e-9));
    }
  }
  // t(1) has quantile tan(pi (p - 1/2))
  CHECK(student_t_quantile(0.75, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("incomplete gamma and its inverse") {
  // P(1/2, x) = erf(sqrt(x))
  for (double x : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    CHECK(lower_gamma_reg(0.5, x) ==
          doctest::Approx(std::erf(std::sqrt(x))).epsilon(1e-12));
  }
  // P(1, x) = 1 - exp(-x)
  CHECK(lower_gamma_reg(1.0, 0.7) == doctest::Approx(1.0 - std::exp(-0.7)).epsilon(1e-12));
  CHECK(lower_gamma_reg(3.0, 0.0) == 0.0);
  CHECK(upper_gamma_reg(3.0, 0.0) == 1.0);
  for (double a : {0.3, 1.0, 2.5, 10.0, 80.0}) {
    for (double p : {1e-8, 0.01, 0.4, 0.5, 0.95, 0.9999}) {
      const double x = gamma_quantile(p, a, 1.0);
      CHECK(lower_gamma_reg(a, x) == doctest::Approx(p).epsilon(1e-7));
    }
  }
}

TEST_CASE("chi-squared helpers") {
  // median of chi2(2) is 2 ln 2
  CHECK(chisq_quantile(0.5, 2.0) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
  CHECK(chisq_cdf(chisq_quantile(0.99, 7.0), 7.0) == doctest::Approx(0.99).epsilon(1e-9));
  CHECK_THROWS_AS(chisq_quantile(0.5, -1.0), ValidationError);
}

TEST_CASE("incomplete beta special values") {
  CHECK(inc_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(inc_beta(2.0, 3.0, 1.0) == 1.0);
  // I_x(1,1) = x
  CHECK(inc_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
  // I_x(2,2) = x^2 (3 - 2x)
  CHECK(inc_beta(2.0, 2.0, 0.3) == doctest::Approx(0.09 * (3 - 0.6)).epsilon(1e-12));
}

TEST_CASE("truncated upper mean is stable") {
  // E[Z | Z <= z] -> -hazard; at z = 0 equals -sqrt(2/pi)
  CHECK(trunc_upper_mean(0.0) == doctest::Approx(-std::sqrt(2.0 / M_PI)).epsilon(1e-12));
  CHECK(trunc_upper_mean(kInf) == 0.0);
  const double m = trunc_upper_mean(-40.0);
  CHECK(std::isfinite(m));
  CHECK(m == doctest::Approx(-40.0 - 1.0 / 40.0).epsilon(1e-3));
}
