#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "skewlink/rng.hpp"
#include "skewlink/skewdist.hpp"
#include "skewlink/specfun.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace skewlink;
using namespace skewlink::skewdist;

namespace {

SkewEllipticalParams sn1(double alpha) {
  SkewEllipticalParams p;
  p.xi = Vector::Zero(1);
  p.sigma = Matrix::Identity(1, 1);
  p.alpha = Vector::Constant(1, alpha);
  return p;
}

SkewEllipticalParams st1(double alpha, double nu) {
  SkewEllipticalParams p = sn1(alpha);
  p.kernel = Kernel::student;
  p.nu = nu;
  return p;
}

mvprob::QmcConfig tight() {
  mvprob::QmcConfig cfg;
  cfg.abs_target = 1e-8;
  cfg.max_evaluations = 5'000'000;
  return cfg;
}

}  // namespace

TEST_CASE("delta_from_alpha") {
  CHECK(delta_from_alpha(Vector::Zero(3), Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK(delta_from_alpha(Vector::Constant(1, 1.0), Matrix::Identity(1, 1))[0] ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  Vector a(2);
  a << 3.0, 4.0;
  const Vector d = delta_from_alpha(a, Matrix::Identity(2, 2));
  CHECK(d[0] == doctest::Approx(3.0 / std::sqrt(26.0)).epsilon(1e-12));
  CHECK(d[1] == doctest::Approx(4.0 / std::sqrt(26.0)).epsilon(1e-12));
}

TEST_CASE("delta identity 1 - d'Sb^-1 d = 1/(1+a'Sb a)") {
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + trial % 3;
    Matrix l = Matrix::Identity(m, m);
    for (int i = 1; i < m; ++i)
      for (int j = 0; j < i; ++j) l(i, j) = 0.7 * normal_draw(rng);
    Matrix g = l * l.transpose();
    Vector s = g.diagonal().cwiseSqrt();
    Matrix sb = s.cwiseInverse().asDiagonal() * g * s.cwiseInverse().asDiagonal();
    Vector a(m);
    for (int i = 0; i < m; ++i) a[i] = 3.0 * normal_draw(rng);
    const Vector d = delta_from_alpha(a, sb);
    const double lhs = 1.0 - d.dot(sb.llt().solve(d));
    const double rhs = 1.0 / (1.0 + a.dot(sb * a));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
  }
}

TEST_CASE("admissible") {
  CHECK(admissible(Matrix::Identity(2, 2), Vector::Zero(2)));
  Matrix sb(2, 2);
  sb << 1.0, 0.4, 0.4, 1.0;
  Vector a(2);
  a << 5.0, -8.0;
  CHECK(admissible(sb, a));  // always true for delta derived from alpha
  Matrix singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  CHECK_FALSE(admissible(singular, Vector::Zero(2)));
}

TEST_CASE("sn_pdf basics") {
  SUBCASE("at the location the skew factor cancels") {
    Vector x = Vector::Zero(2);
    SkewEllipticalParams p;
    p.xi = Vector::Zero(2);
    p.sigma = (Matrix(2, 2) << 2.0, 0.3, 0.3, 1.0).finished();
    p.alpha = (Vector(2) << 1.5, -0.4).finished();
    CHECK(sn_pdf(x, p) ==
          doctest::Approx(std::exp(mvn_logpdf(x, p.sigma))).epsilon(1e-12));
  }
  SUBCASE("alpha=0 collapses to the normal everywhere") {
    SkewEllipticalParams p = sn1(0.0);
    for (double x : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
      CHECK(sn_pdf(Vector::Constant(1, x), p) ==
            doctest::Approx(norm_pdf(x)).epsilon(1e-12));
    }
  }
  SUBCASE("d=1 density integrates to one") {
    SkewEllipticalParams p = sn1(1.0);
    const double integral = testutil::trapezoid(
        [&](double x) { return sn_pdf(Vector::Constant(1, x), p); }, -10.0, 10.0,
        1e-3);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("st_pdf basics") {
  SUBCASE("alpha=0 collapses to the t density") {
    SkewEllipticalParams p = st1(0.0, 4.0);
    for (double x : {-2.0, 0.0, 1.5}) {
      CHECK(st_pdf(Vector::Constant(1, x), p) ==
            doctest::Approx(student_t_pdf(x, 4.0)).epsilon(1e-12));
    }
  }
  SUBCASE("large nu approaches the skew-normal") {
    SkewEllipticalParams t = st1(1.0, 1e6);
    SkewEllipticalParams n = sn1(1.0);
    for (double x : {-2.0, 0.0, 2.0}) {
      const double ft = st_pdf(Vector::Constant(1, x), t);
      const double fn = sn_pdf(Vector::Constant(1, x), n);
      CHECK(std::fabs(ft - fn) / fn < 1e-5);
    }
  }
  SUBCASE("d=1 density integrates to one") {
    SkewEllipticalParams p = st1(2.0, 4.0);
    const double integral = testutil::trapezoid(
        [&](double x) { return st_pdf(Vector::Constant(1, x), p); }, -60.0, 60.0,
        1e-3);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("invalid nu") {
    CHECK_THROWS_AS(st_pdf(Vector::Zero(1), st1(1.0, 0.0)), ValidationError);
  }
}

TEST_CASE("se_cdf") {
  SUBCASE("alpha=0 at the location gives 1/2") {
    const auto est = se_cdf(Vector::Zero(1), sn1(0.0), tight(), 3);
    CHECK(est.value == doctest::Approx(0.5).epsilon(1e-9));
  }
  SUBCASE("orthant value at alpha=1") {
    const auto est = se_cdf(Vector::Zero(1), sn1(1.0), tight(), 3);
    const double expected =
        2.0 * (0.25 + std::asin(-1.0 / std::sqrt(2.0)) / (2.0 * M_PI));
    CHECK(expected == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::fabs(est.value - 0.25) < 1e-3);
  }
  SUBCASE("matches quadrature of the pdf") {
    SkewEllipticalParams p = sn1(1.0);
    for (double x : {-1.0, 0.0, 1.0}) {
      const double quad = testutil::trapezoid(
          [&](double t) { return sn_pdf(Vector::Constant(1, t), p); }, -10.0, x,
          1e-3);
      const auto est = se_cdf(Vector::Constant(1, x), p, tight(), 9);
      CHECK(std::fabs(est.value - quad) < 1e-4);
    }
  }
  SUBCASE("student kernel orthant is nu-free") {
    const auto est = se_cdf(Vector::Zero(1), st1(1.0, 5.0), tight(), 4);
    CHECK(std::fabs(est.value - 0.25) < 1e-3);
  }
}

TEST_CASE("cdf/pdf consistency by central differences") {
  SkewEllipticalParams p = sn1(1.0);
  const double h = 1e-3;
  for (double x = -2.0; x <= 2.0; x += 0.5) {
    const double up = se_cdf(Vector::Constant(1, x + h), p, tight(), 5).value;
    const double dn = se_cdf(Vector::Constant(1, x - h), p, tight(), 5).value;
    const double deriv = (up - dn) / (2.0 * h);
    const double f = sn_pdf(Vector::Constant(1, x), p);
    CHECK(std::fabs(deriv - f) / f < 1e-3);
  }
}

TEST_CASE("sun_pdf") {
  SUBCASE("lambda=0, tau=0 is the plain normal") {
    UnifiedSkewParams p;
    p.xi = Vector::Zero(2);
    p.sigma = (Matrix(2, 2) << 1.0, 0.2, 0.2, 1.0).finished();
    p.lambda = Matrix::Zero(1, 2);
    p.tau = Vector::Zero(1);
    p.gamma = Matrix::Identity(1, 1);
    Vector x(2);
    x << 0.4, -0.7;
    CHECK(sun_pdf(x, p, tight(), 3) ==
          doctest::Approx(std::exp(mvn_logpdf(x, p.sigma))).epsilon(1e-9));
  }
  SUBCASE("m=1, tau=0, lambda=alpha reproduces the skew-normal") {
    UnifiedSkewParams p;
    p.xi = Vector::Zero(1);
    p.sigma = Matrix::Identity(1, 1);
    p.lambda = Matrix::Constant(1, 1, 1.0);
    p.tau = Vector::Zero(1);
    p.gamma = Matrix::Identity(1, 1);
    const SkewEllipticalParams q = sn1(1.0);
    for (double x : {-1.0, 0.0, 1.0}) {
      CHECK(sun_pdf(Vector::Constant(1, x), p, tight(), 3) ==
            doctest::Approx(sn_pdf(Vector::Constant(1, x), q)).epsilon(1e-10));
    }
  }
  SUBCASE("d=1, m=1 extended family integrates to one") {
    UnifiedSkewParams p;
    p.xi = Vector::Zero(1);
    p.sigma = Matrix::Identity(1, 1);
    p.lambda = Matrix::Constant(1, 1, 0.5);
    p.tau = Vector::Constant(1, 1.0);
    p.gamma = Matrix::Identity(1, 1);
    const double integral = testutil::trapezoid(
        [&](double x) { return sun_pdf(Vector::Constant(1, x), p, tight(), 3); },
        -10.0, 10.0, 1e-3);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("sut_pdf") {
  UnifiedSkewParams p;
  p.xi = Vector::Zero(1);
  p.sigma = Matrix::Identity(1, 1);
  p.lambda = Matrix::Constant(1, 1, 0.8);
  p.tau = Vector::Constant(1, 0.3);
  p.gamma = Matrix::Identity(1, 1);
  p.kernel = Kernel::student;
  p.nu = 5.0;

  SUBCASE("lambda=0, tau=0 is the plain t") {
    UnifiedSkewParams q = p;
    q.lambda.setZero();
    q.tau.setZero();
    for (double x : {-1.5, 0.0, 2.0}) {
      CHECK(sut_pdf(Vector::Constant(1, x), q, tight(), 3) ==
            doctest::Approx(student_t_pdf(x, 5.0)).epsilon(1e-9));
    }
  }
  SUBCASE("large nu approaches the sun density") {
    UnifiedSkewParams q = p;
    q.nu = 1e6;
    UnifiedSkewParams n = p;
    n.kernel = Kernel::normal;
    for (double x : {-1.0, 0.0, 1.0}) {
      const double ft = sut_pdf(Vector::Constant(1, x), q, tight(), 3);
      const double fn = sun_pdf(Vector::Constant(1, x), n, tight(), 3);
      CHECK(std::fabs(ft - fn) / fn < 1e-4);
    }
  }
  SUBCASE("d=1, m=1 integrates to one") {
    const double integral = testutil::trapezoid(
        [&](double x) { return sut_pdf(Vector::Constant(1, x), p, tight(), 3); },
        -40.0, 40.0, 1e-3);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("sample_sn") {
  SUBCASE("alpha=0 passes a KS test against the normal") {
    const Matrix draws = sample_sn(sn1(0.0), 100000, 42);
    std::vector<double> v(draws.data(), draws.data() + draws.rows());
    CHECK(testutil::ks_one_sample(v, [](double x) { return norm_cdf(x); }));
  }
  SUBCASE("d=1 alpha=1 mean is delta sqrt(2/pi)") {
    const Matrix draws = sample_sn(sn1(1.0), 100000, 43);
    const double expected = std::sqrt(2.0 / M_PI) / std::sqrt(2.0);
    CHECK(std::fabs(draws.col(0).mean() - expected) < 0.01);
  }
  SUBCASE("fraction below zero matches the cdf") {
    const Matrix draws = sample_sn(sn1(1.0), 100000, 44);
    const double frac = (draws.col(0).array() <= 0.0).cast<double>().mean();
    CHECK(std::fabs(frac - 0.25) < 0.005);
  }
  SUBCASE("seed determinism") {
    const Matrix a = sample_sn(sn1(2.0), 64, 9);
    const Matrix b = sample_sn(sn1(2.0), 64, 9);
    CHECK(a == b);
  }
}

TEST_CASE("sample_st") {
  SUBCASE("huge nu, alpha=0 looks normal") {
    const Matrix draws = sample_st(st1(0.0, 1e6), 100000, 45);
    std::vector<double> v(draws.data(), draws.data() + draws.rows());
    CHECK(testutil::ks_one_sample(v, [](double x) { return norm_cdf(x); }));
  }
  SUBCASE("alpha=0 median is zero") {
    Matrix draws = sample_st(st1(0.0, 3.0), 100000, 46);
    std::vector<double> v(draws.data(), draws.data() + draws.rows());
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    CHECK(std::fabs(v[v.size() / 2]) < 0.01);
  }
  SUBCASE("orthant fraction is nu-free") {
    const Matrix draws = sample_st(st1(1.0, 5.0), 100000, 47);
    const double frac = (draws.col(0).array() <= 0.0).cast<double>().mean();
    CHECK(std::fabs(frac - 0.25) < 0.005);
  }
}

TEST_CASE("sampler/density agreement by chi-squared GOF") {
  for (double alpha : {0.0, 1.0, 5.0}) {
    const SkewEllipticalParams p = sn1(alpha);
    const std::size_t n = 1'000'000;
    const Matrix draws = sample_sn(p, n, 1000 + static_cast<int>(alpha));
    const int bins = 60;
    const double lo = -5.0, hi = 5.0, width = (hi - lo) / bins;
    std::vector<long> observed(bins + 2, 0);
    for (Eigen::Index i = 0; i < draws.rows(); ++i) {
      const double x = draws(i, 0);
      if (x < lo)
        ++observed[0];
      else if (x >= hi)
        ++observed[bins + 1];
      else
        ++observed[1 + static_cast<int>((x - lo) / width)];
    }
    std::vector<double> expected(bins + 2, 0.0);
    for (int b = 0; b < bins; ++b) {
      expected[1 + b] = testutil::trapezoid(
          [&](double x) { return sn_pdf(Vector::Constant(1, x), p); },
          lo + b * width, lo + (b + 1) * width, width / 64.0);
    }
    mvprob::QmcConfig cfg = tight();
    expected[0] = se_cdf(Vector::Constant(1, lo), p, cfg, 8).value;
    expected[bins + 1] =
        1.0 - se_cdf(Vector::Constant(1, hi), p, cfg, 8).value;
    CHECK(testutil::chisq_gof(observed, expected, n));
  }
}

TEST_CASE("sign-flip closure: -X from SN(alpha) matches SN(-alpha)") {
  const Matrix a = sample_sn(sn1(1.5), 50000, 77);
  const Matrix b = sample_sn(sn1(-1.5), 50000, 78);
  std::vector<double> va(a.rows()), vb(b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) va[i] = -a(i, 0);
  for (Eigen::Index i = 0; i < b.rows(); ++i) vb[i] = b(i, 0);
  CHECK(testutil::ks_two_sample(va, vb));
}
