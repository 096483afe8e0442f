#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "skewlink/mvprob.hpp"
#include "skewlink/rng.hpp"
#include "skewlink/specfun.hpp"

#include "test_util.hpp"

#include <cmath>

using namespace skewlink;
using namespace skewlink::mvprob;

namespace {

double orthant2(double rho) { return 0.25 + std::asin(rho) / (2.0 * M_PI); }

Matrix corr2(double rho) {
  Matrix s(2, 2);
  s << 1.0, rho, rho, 1.0;
  return s;
}

Matrix random_spd(int d, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = normal_draw(rng);
  Matrix s = a * a.transpose();
  s.diagonal().array() += d * 0.5;
  return s;
}

// Plain Monte Carlo oracle for P(X <= b).
double mc_oracle(const Matrix& cov, const Vector& upper, std::size_t n,
                 std::uint64_t seed, double* se) {
  const int d = static_cast<int>(cov.rows());
  const Matrix l = jittered_cholesky(cov);
  const CounterRng base(seed, 0);
  std::size_t hits = 0;
#pragma omp parallel for schedule(static) reduction(+ : hits)
  for (std::ptrdiff_t block = 0; block < 256; ++block) {
    CounterRng rng = base.substream(block);
    const std::size_t lo = block * n / 256, hi = (block + 1) * n / 256;
    Vector z(d);
    for (std::size_t k = lo; k < hi; ++k) {
      for (int i = 0; i < d; ++i) z[i] = normal_draw(rng);
      const Vector x = l * z;
      bool in = true;
      for (int i = 0; i < d && in; ++i) in = x[i] <= upper[i];
      hits += in;
    }
  }
  const double p = static_cast<double>(hits) / n;
  if (se) *se = std::sqrt(std::fmax(p * (1.0 - p), 1e-12) / n);
  return p;
}

QmcConfig qmc_only() {
  QmcConfig cfg;
  cfg.closed_forms = false;
  return cfg;
}

}  // namespace

TEST_CASE("univariate reduction is exact") {
  GaussianProblem p{Vector::Constant(1, 0.0), Matrix::Identity(1, 1), Vector()};
  const auto est = mvn_cdf(p, 1e-6, 7);
  CHECK(est.value == 0.5);
  CHECK(est.error == 0.0);

  StudentProblem t;
  t.upper = Vector::Constant(1, 0.0);
  t.covariance = Matrix::Identity(1, 1);
  t.df = 7.0;
  CHECK(mvt_cdf(t, 1e-6, 7).value == 0.5);
}

TEST_CASE("bivariate orthant identity, closed form and lattice") {
  for (double rho : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    GaussianProblem p{Vector::Zero(2), corr2(rho), Vector()};
    const auto closed = mvn_cdf(p, QmcConfig{}, 3);
    CHECK(closed.value == doctest::Approx(orthant2(rho)).epsilon(5e-7));

    QmcConfig lattice = qmc_only();
    lattice.abs_target = 1e-4;
    const auto est = mvn_cdf(p, lattice, 3);
    CHECK(std::fabs(est.value - orthant2(rho)) < 5e-4);
  }
}

TEST_CASE("trivariate diagonal product") {
  GaussianProblem p{Vector::Zero(3), Matrix::Identity(3, 3) * 2.0, Vector()};
  const auto est = mvn_cdf(p, 1e-4, 5);
  CHECK(std::fabs(est.value - 0.125) < 5e-4);
}

TEST_CASE("shift moves the limits") {
  GaussianProblem p{Vector::Constant(1, 1.0), Matrix::Identity(1, 1),
                    Vector::Constant(1, 1.0)};
  CHECK(mvn_cdf(p, 1e-6, 1).value == doctest::Approx(0.5));
}

TEST_CASE("student orthants") {
  StudentProblem t;
  t.covariance = corr2(0.0);
  t.upper = Vector::Zero(2);
  t.df = 5.0;
  CHECK(std::fabs(mvt_cdf(t, 1e-4, 3).value - 0.25) < 5e-4);

  t.covariance = corr2(0.5);
  CHECK(std::fabs(mvt_cdf(t, 1e-4, 3).value - 1.0 / 3.0) < 5e-4);

  // the lattice path agrees with the quadrature path
  QmcConfig lattice = qmc_only();
  lattice.abs_target = 2e-4;
  const auto est = mvt_cdf(t, lattice, 3);
  CHECK(std::fabs(est.value - 1.0 / 3.0) < 1e-3);

  t.df = -1.0;
  CHECK_THROWS_AS(mvt_cdf(t, 1e-4, 3), ValidationError);
}

TEST_CASE("student converges to the normal") {
  Vector upper(3);
  upper << 0.3, -0.2, 0.8;
  const Matrix cov = random_spd(3, 99);
  StudentProblem t;
  t.upper = upper;
  t.covariance = cov;
  t.df = 1e8;
  GaussianProblem g{upper, cov, Vector()};
  const auto et = mvt_cdf(t, 1e-5, 11);
  const auto eg = mvn_cdf(g, 1e-5, 12);
  CHECK(std::fabs(et.value - eg.value) < et.error + eg.error + 2e-4);
}

TEST_CASE("reorder_cholesky") {
  SUBCASE("identity is untouched") {
    const auto rc = reorder_cholesky(Matrix::Identity(3, 3), Vector::Zero(3));
    CHECK(rc.permutation == std::vector<int>{0, 1, 2});
    CHECK(rc.lower.isApprox(Matrix::Identity(3, 3), 1e-14));
  }
  SUBCASE("infinite limit is ordered last") {
    Vector upper(2);
    upper << kInf, 0.0;
    const auto rc = reorder_cholesky(Matrix::Identity(2, 2), upper);
    CHECK(rc.permutation == std::vector<int>{1, 0});
    CHECK(rc.upper[0] == 0.0);
    CHECK(rc.upper[1] == kInf);
  }
  SUBCASE("factorization identity on random inputs") {
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const int d = 2 + static_cast<int>(s % 5);
      const Matrix cov = random_spd(d, s * 31);
      CounterRng rng(s, 5);
      Vector upper(d);
      for (int i = 0; i < d; ++i) upper[i] = normal_draw(rng);
      const auto rc = reorder_cholesky(cov, upper);
      Matrix perm_cov(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          perm_cov(i, j) = cov(rc.permutation[i], rc.permutation[j]);
      const Matrix rebuilt = rc.lower * rc.lower.transpose();
      CHECK((rebuilt - perm_cov).cwiseAbs().maxCoeff() <
            1e-10 * perm_cov.cwiseAbs().maxCoeff());
    }
  }
  SUBCASE("non-PD input throws") {
    Matrix bad(2, 2);
    bad << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(reorder_cholesky(bad, Vector::Zero(2)), NumericalError);
  }
}

TEST_CASE("monotonicity in the limits") {
  const Matrix cov = random_spd(3, 1234);
  Vector upper(3);
  upper << 0.2, -0.4, 1.0;
  GaussianProblem p{upper, cov, Vector()};
  const auto base = mvn_cdf(p, 1e-5, 21);
  for (int i = 0; i < 3; ++i) {
    GaussianProblem q = p;
    q.upper[i] += 0.5;
    const auto higher = mvn_cdf(q, 1e-5, 22);
    CHECK(higher.value >= base.value - (base.error + higher.error));
  }
}

TEST_CASE("doubling the budget shrinks the reported error") {
  const Matrix cov = random_spd(5, 777);
  Vector upper(5);
  upper << 0.1, 0.4, -0.3, 0.8, 0.0;
  int improved = 0;
  const int trials = 20;
  for (int s = 0; s < trials; ++s) {
    QmcConfig small = qmc_only();
    small.abs_target = 0.0;
    small.initial_points = 512;
    small.max_evaluations = small.shifts * 512;
    QmcConfig big = small;
    big.initial_points = 1024;
    big.max_evaluations = big.shifts * 1024;
    GaussianProblem p{upper, cov, Vector()};
    const auto e1 = mvn_cdf(p, small, 1000 + s);
    const auto e2 = mvn_cdf(p, big, 1000 + s);
    CHECK(e2.samples_used == 2 * e1.samples_used);
    if (e2.error < e1.error) ++improved;
  }
  CHECK(improved > trials / 2);  // median over seeds improves
}

TEST_CASE("agreement with a plain Monte Carlo oracle up to d=4") {
  for (int d = 2; d <= 4; ++d) {
    const Matrix cov = random_spd(d, 400 + d);
    CounterRng rng(50 + d, 0);
    Vector upper(d);
    for (int i = 0; i < d; ++i) upper[i] = normal_draw(rng) + 0.3;
    double se = 0.0;
    const double ref = mc_oracle(cov, upper, 10'000'000, 9000 + d, &se);
    QmcConfig cfg = qmc_only();
    cfg.abs_target = 1e-5;
    GaussianProblem p{upper, cov, Vector()};
    const auto est = mvn_cdf(p, cfg, 31 + d);
    CHECK(std::fabs(est.value - ref) < 3.0 * (se + est.error) + 1e-6);
  }
}

TEST_CASE("validation and failure modes") {
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  GaussianProblem p{Vector::Zero(2), bad, Vector()};
  CHECK_THROWS_AS(mvn_cdf(p, 1e-4, 1), NumericalError);

  QmcConfig cap;
  cap.dimension_cap = 3;
  GaussianProblem big{Vector::Zero(4), Matrix::Identity(4, 4), Vector()};
  CHECK_THROWS_WITH_AS(mvn_cdf(big, cap, 1), "dimension limit", NumericalError);

  Matrix asym(2, 2);
  asym << 1.0, 0.2, 0.3, 1.0;
  GaussianProblem pa{Vector::Zero(2), asym, Vector()};
  CHECK_THROWS_AS(mvn_cdf(pa, 1e-4, 1), ValidationError);
}

TEST_CASE("all-infinite limits give probability one") {
  GaussianProblem p{Vector::Constant(3, kInf), random_spd(3, 5), Vector()};
  const auto est = mvn_cdf(p, 1e-4, 1);
  CHECK(est.value == 1.0);
  CHECK(est.error == 0.0);
}

TEST_CASE("bvn closed form against the lattice on a grid") {
  for (double rho : {-0.95, -0.6, -0.2, 0.2, 0.6, 0.95}) {
    for (double b1 : {-1.5, 0.0, 0.7}) {
      for (double b2 : {-0.8, 0.3, 2.0}) {
        QmcConfig cfg = qmc_only();
        cfg.abs_target = 5e-6;
        cfg.max_evaluations = 50'000'000;
        GaussianProblem p{(Vector(2) << b1, b2).finished(), corr2(rho), Vector()};
        const auto ref = mvn_cdf(p, cfg, 77);
        CHECK(bvn_cdf(b1, b2, rho) == doctest::Approx(ref.value).epsilon(3e-5));
      }
    }
  }
  CHECK(bvn_cdf(0.0, 0.0, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("bvt quadrature against the lattice") {
  for (double rho : {-0.7, 0.0, 0.5}) {
    for (double nu : {1.0, 4.0, 30.0}) {
      QmcConfig cfg = qmc_only();
      cfg.abs_target = 1e-5;
      cfg.max_evaluations = 50'000'000;
      StudentProblem t;
      t.upper = (Vector(2) << 0.4, -0.6).finished();
      t.covariance = corr2(rho);
      t.df = nu;
      const auto ref = mvt_cdf(t, cfg, 78);
      CHECK(std::fabs(bvt_cdf(0.4, -0.6, rho, nu) - ref.value) <
            ref.error + 5e-5);
    }
  }
  // degenerate correlations
  CHECK(bvt_cdf(0.3, 0.8, 1.0, 5.0) == doctest::Approx(student_t_cdf(0.3, 5.0)));
  CHECK(bvt_cdf(1.0, -1.0, -1.0, 5.0) ==
        doctest::Approx(student_t_cdf(1.0, 5.0) + student_t_cdf(-1.0, 5.0) - 1.0));
}
