#include "skewlink/mvprob.hpp"

#include "skewlink/rng.hpp"
#include "skewlink/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace skewlink::mvprob {

namespace {

std::vector<double> sqrt_primes(int count) {
  std::vector<double> out;
  out.reserve(count);
  int candidate = 2;
  while (static_cast<int>(out.size()) < count) {
    bool prime = true;
    for (int f = 2; f * f <= candidate; ++f) {
      if (candidate % f == 0) {
        prime = false;
        break;
      }
    }
    if (prime) out.push_back(std::sqrt(static_cast<double>(candidate)));
    ++candidate;
  }
  return out;
}

void validate_problem(const GaussianProblem& p, const QmcConfig& cfg) {
  const int d = static_cast<int>(p.upper.size());
  if (d < 1) throw ValidationError("mvprob: empty problem");
  if (p.covariance.rows() != d || p.covariance.cols() != d)
    throw ValidationError("mvprob: covariance dimension mismatch");
  if (d > cfg.dimension_cap) throw NumericalError("dimension limit");
  if (p.shift.size() != 0 && p.shift.size() != d)
    throw ValidationError("mvprob: shift dimension mismatch");
  const double scale = std::fmax(1.0, p.covariance.cwiseAbs().maxCoeff());
  for (int i = 0; i < d; ++i) {
    if (std::isnan(p.upper[i]) || p.upper[i] == -kInf)
      throw ValidationError("mvprob: invalid upper limit");
    for (int j = 0; j < i; ++j) {
      if (std::fabs(p.covariance(i, j) - p.covariance(j, i)) > 1e-12 * scale)
        throw ValidationError("mvprob: covariance not symmetric");
    }
  }
}

Vector effective_upper(const GaussianProblem& p) {
  if (p.shift.size() == 0) return p.upper;
  Vector b = p.upper;
  for (int i = 0; i < b.size(); ++i) {
    if (b[i] != kInf) b[i] -= p.shift[i];
  }
  return b;
}

ReorderedCholesky reorder_impl(Matrix c, Vector b) {
  const int d = static_cast<int>(c.rows());
  ReorderedCholesky rc;
  rc.permutation.resize(d);
  std::iota(rc.permutation.begin(), rc.permutation.end(), 0);
  Vector y = Vector::Zero(d);  // conditional expectations of committed variables

  for (int i = 0; i < d; ++i) {
    // Pick the remaining variable with the smallest conditional probability.
    int best = -1;
    double best_e = 2.0;
    for (int j = i; j < d; ++j) {
      double denom2 = c(j, j);
      double num = (b[j] == kInf) ? kInf : b[j];
      for (int k = 0; k < i; ++k) {
        denom2 -= c(j, k) * c(j, k);
        if (num != kInf) num -= c(j, k) * y[k];
      }
      if (denom2 <= 0.0) throw NumericalError("not positive definite");
      const double e = (num == kInf) ? 1.0 : norm_cdf(num / std::sqrt(denom2));
      if (e < best_e) {
        best_e = e;
        best = j;
      }
    }
    if (best != i) {
      c.row(i).swap(c.row(best));
      c.col(i).swap(c.col(best));
      std::swap(b[i], b[best]);
      std::swap(rc.permutation[i], rc.permutation[best]);
    }
    // Cholesky step for the pivot row/column.
    double piv = c(i, i);
    for (int k = 0; k < i; ++k) piv -= c(i, k) * c(i, k);
    if (piv <= 0.0) throw NumericalError("not positive definite");
    piv = std::sqrt(piv);
    c(i, i) = piv;
    for (int r = i + 1; r < d; ++r) {
      double v = c(r, i);
      for (int k = 0; k < i; ++k) v -= c(r, k) * c(i, k);
      c(r, i) = v / piv;
    }
    if (b[i] == kInf) {
      y[i] = 0.0;
    } else {
      double num = b[i];
      for (int k = 0; k < i; ++k) num -= c(i, k) * y[k];
      y[i] = trunc_upper_mean(num / piv);
    }
  }
  rc.lower = c.triangularView<Eigen::Lower>();
  rc.upper = std::move(b);
  return rc;
}

ReorderedCholesky reorder_with_jitter(const Matrix& covariance, const Vector& upper) {
  const int d = static_cast<int>(covariance.rows());
  double jitter = 0.0;
  double base = 1e-10 * covariance.trace() / d;
  if (base <= 0.0) base = 1e-14;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Matrix c = covariance;
    if (jitter > 0.0) c.diagonal().array() += jitter;
    try {
      return reorder_impl(std::move(c), upper);
    } catch (const NumericalError&) {
      jitter = (jitter == 0.0) ? base : jitter * 10.0;
    }
  }
  throw NumericalError("not positive definite");
}

struct SovProblem {
  Matrix lower;    // reordered Cholesky factor
  Vector b;        // reordered limits
  int n_finite;    // finite limits come first after reordering
  double df = 0.0; // 0 means the normal kernel
};

// Separation-of-variables integrand on the unit cube. `w` has n_finite-1
// entries for the normal kernel plus a leading radial entry for Student-t.
double sov_integrand(const SovProblem& pb, const double* w, double* y) {
  const int nf = pb.n_finite;
  int wpos = 0;
  double radial = 1.0;
  if (pb.df > 0.0) {
    const double u0 = std::clamp(w[wpos++], 1e-16, 1.0 - 1e-16);
    radial = std::sqrt(gamma_quantile(u0, 0.5 * pb.df, 2.0) / pb.df);
  }
  double prod = 1.0;
  for (int i = 0; i < nf; ++i) {
    double m = 0.0;
    for (int k = 0; k < i; ++k) m += pb.lower(i, k) * y[k];
    const double z = (radial * pb.b[i] - m) / pb.lower(i, i);
    const double e = norm_cdf(z);
    prod *= e;
    if (prod <= 0.0) return 0.0;
    if (i + 1 < nf) {
      const double arg = std::clamp(w[wpos++] * e, 1e-300, 1.0 - 1e-16);
      y[i] = norm_quantile(arg);
    }
  }
  return prod;
}

ProbEstimate integrate_sov(const SovProblem& pb, const QmcConfig& cfg,
                           std::uint64_t seed) {
  const int dim = (pb.df > 0.0 ? pb.n_finite : pb.n_finite - 1);
  const std::vector<double> gen = sqrt_primes(dim);
  const CounterRng base(seed, 0);

  ProbEstimate out;
  std::size_t n_points = std::max<std::size_t>(2, cfg.initial_points);
  std::uint64_t total = 0;
  const int n_shift = std::max(2, cfg.shifts);
  std::vector<double> shift_mean(n_shift);

  for (int round = 0;; ++round) {
#pragma omp parallel for schedule(static) if (cfg.parallel)
    for (int s = 0; s < n_shift; ++s) {
      CounterRng rng = base.substream(static_cast<std::uint64_t>(round) * n_shift + s + 1);
      std::vector<double> delta(dim), x(dim), w(dim), y(std::max(0, pb.n_finite - 1));
      for (int j = 0; j < dim; ++j) {
        delta[j] = rng.next_double();
        x[j] = delta[j];
      }
      double sum = 0.0;
      for (std::size_t k = 0; k < n_points; ++k) {
        for (int j = 0; j < dim; ++j) {
          w[j] = std::fabs(2.0 * x[j] - 1.0);  // baker transform
          x[j] += gen[j];
          x[j] -= std::floor(x[j]);
        }
        sum += sov_integrand(pb, w.data(), y.data());
      }
      shift_mean[s] = sum / static_cast<double>(n_points);
    }
    double mean = 0.0;
    for (double m : shift_mean) mean += m;
    mean /= n_shift;
    double var = 0.0;
    for (double m : shift_mean) var += (m - mean) * (m - mean);
    var /= (n_shift - 1);
    out.value = mean;
    out.error = 3.5 * std::sqrt(var / n_shift);
    total += static_cast<std::uint64_t>(n_points) * n_shift;
    out.samples_used = total;

    const double target = std::fmax(cfg.abs_target, cfg.rel_target * std::fabs(mean));
    if (out.error <= target || total >= cfg.max_evaluations) break;
    n_points *= 2;
  }
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

ProbEstimate run(const GaussianProblem& problem, double df, const QmcConfig& cfg,
                 std::uint64_t seed) {
  validate_problem(problem, cfg);
  if (df < 0.0 || std::isnan(df)) throw ValidationError("invalid df");
  const Vector b0 = effective_upper(problem);
  ReorderedCholesky rc = reorder_with_jitter(problem.covariance, b0);
  const int d = static_cast<int>(b0.size());

  int n_finite = 0;
  for (int i = 0; i < d; ++i) {
    if (rc.upper[i] != kInf) ++n_finite;
  }
  if (n_finite == 0) return {1.0, 0.0, 0};

  // Degenerate and low-dimensional cases have closed forms.
  if (n_finite == 1) {
    const double z = rc.upper[0] / rc.lower(0, 0);
    const double v = (df > 0.0) ? student_t_cdf(z, df) : norm_cdf(z);
    return {v, 0.0, 0};
  }
  if (n_finite == 2 && cfg.closed_forms) {
    const double s1 = std::sqrt(rc.lower.row(0).head(2).squaredNorm());
    const double s2 = std::sqrt(rc.lower.row(1).head(2).squaredNorm());
    const double rho =
        std::clamp(rc.lower(1, 0) * rc.lower(0, 0) / (s1 * s2), -1.0, 1.0);
    const double z1 = rc.upper[0] / s1, z2 = rc.upper[1] / s2;
    const double v = (df > 0.0) ? bvt_cdf(z1, z2, rho, df) : bvn_cdf(z1, z2, rho);
    return {std::clamp(v, 0.0, 1.0), 1e-12, 0};
  }

  SovProblem pb;
  pb.lower = std::move(rc.lower);
  pb.b = std::move(rc.upper);
  pb.n_finite = n_finite;
  pb.df = df;
  return integrate_sov(pb, cfg, seed);
}

}  // namespace

ReorderedCholesky reorder_cholesky(const Matrix& covariance, const Vector& upper) {
  if (covariance.rows() != upper.size())
    throw ValidationError("reorder_cholesky: dimension mismatch");
  return reorder_impl(covariance, upper);
}

ProbEstimate mvn_cdf(const GaussianProblem& problem, const QmcConfig& config,
                     std::uint64_t seed) {
  return run(problem, 0.0, config, seed);
}

ProbEstimate mvt_cdf(const StudentProblem& problem, const QmcConfig& config,
                     std::uint64_t seed) {
  if (!(problem.df > 0.0)) throw ValidationError("invalid df");
  return run(problem, problem.df, config, seed);
}

ProbEstimate mvn_cdf(const GaussianProblem& problem, double accuracy,
                     std::uint64_t seed) {
  QmcConfig cfg;
  cfg.abs_target = accuracy;
  return mvn_cdf(problem, cfg, seed);
}

ProbEstimate mvt_cdf(const StudentProblem& problem, double accuracy,
                     std::uint64_t seed) {
  QmcConfig cfg;
  cfg.abs_target = accuracy;
  return mvt_cdf(problem, cfg, seed);
}

namespace {

// Genz's Gauss-Legendre scheme for the bivariate normal upper orthant
// P(X > h, Y > k); node count grows with |rho|.
double bvn_upper(double h, double k, double r) {
  static const double w6[] = {0.1713244923791704, 0.3607615730481386,
                              0.4679139345726910};
  static const double x6[] = {0.9324695142031521, 0.6612093864662645,
                              0.2386191860831969};
  static const double w12[] = {0.04717533638651183, 0.1069393259953184,
                               0.1600783285433462,  0.2031674267230659,
                               0.2334925365383548,  0.2491470458134028};
  static const double x12[] = {0.9815606342467192, 0.9041172563704749,
                               0.7699026741943047, 0.5873179542866175,
                               0.3678314989981802, 0.1252334085114689};
  static const double w20[] = {0.01761400713915212, 0.04060142980038694,
                               0.06267204833410907, 0.08327674157670475,
                               0.1019301198172404,  0.1181945319615184,
                               0.1316886384491766,  0.1420961093183820,
                               0.1491729864726037,  0.1527533871307258};
  static const double x20[] = {0.9931285991850949,  0.9639719272779138,
                               0.9122344282513259,  0.8391169718222188,
                               0.7463319064601508,  0.6360536807265150,
                               0.5108670019508271,  0.3737060887154195,
                               0.2277858511416451,  0.07652652113349734};
  const double* w;
  const double* x;
  int lg;
  const double ar = std::fabs(r);
  if (ar < 0.3) {
    lg = 3, w = w6, x = x6;
  } else if (ar < 0.75) {
    lg = 6, w = w12, x = x12;
  } else {
    lg = 10, w = w20, x = x20;
  }

  const double twopi = 2.0 * M_PI;
  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    if (ar > 0.0) {
      const double hs = 0.5 * (h * h + k * k);
      const double asr = std::asin(r);
      for (int i = 0; i < lg; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          const double sn = std::sin(asr * (is * x[i] + 1.0) / 2.0);
          bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      }
      bvn = bvn * asr / (2.0 * twopi);
    }
    return bvn + norm_cdf(-h) * norm_cdf(-k);
  }

  double kk = k;
  if (r < 0.0) {
    kk = -kk;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - kk) * (h - kk);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0)
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (-hk < 100.0) {
      const double bb = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(twopi) * norm_cdf(-bb / a) * bb *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        const double xs = a * (is * x[i] + 1.0);
        const double xs2 = xs * xs;
        const double rs = std::sqrt(1.0 - xs2);
        asr = -(bs / xs2 + hk) / 2.0;
        if (asr > -100.0) {
          bvn += a * w[i] * std::exp(asr) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                  (1.0 + c * xs2 * (1.0 + d * xs2)));
        }
      }
    }
    bvn = -bvn / twopi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::fmax(h, kk));
  bvn = -bvn;
  if (kk > h) bvn += norm_cdf(kk) - norm_cdf(h);
  return bvn;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

}  // namespace

double bvn_cdf(double b1, double b2, double rho) {
  if (std::isnan(b1) || std::isnan(b2) || !(rho >= -1.0 && rho <= 1.0))
    throw ValidationError("bvn_cdf: invalid argument");
  if (b1 == -kInf || b2 == -kInf) return 0.0;
  if (b1 == kInf) return norm_cdf(b2);
  if (b2 == kInf) return norm_cdf(b1);
  if (rho >= 1.0) return norm_cdf(std::fmin(b1, b2));
  if (rho <= -1.0) return std::fmax(0.0, norm_cdf(b1) + norm_cdf(b2) - 1.0);
  return std::clamp(bvn_upper(-b1, -b2, rho), 0.0, 1.0);
}

double bvt_cdf(double b1, double b2, double rho, double nu) {
  if (!(nu > 0.0)) throw ValidationError("invalid df");
  if (std::isnan(b1) || std::isnan(b2) || !(rho >= -1.0 && rho <= 1.0))
    throw ValidationError("bvt_cdf: invalid argument");
  if (b1 == -kInf || b2 == -kInf) return 0.0;
  if (b1 == kInf) return student_t_cdf(b2, nu);
  if (b2 == kInf) return student_t_cdf(b1, nu);
  if (nu > 1e8) return bvn_cdf(b1, b2, rho);
  if (rho >= 1.0) return student_t_cdf(std::fmin(b1, b2), nu);
  if (rho <= -1.0)
    return std::fmax(0.0, student_t_cdf(b1, nu) + student_t_cdf(b2, nu) - 1.0);

  // Integrate the conditional cdf over the first coordinate, in cdf scale:
  // X2 | X1=x is t with df nu+1, location rho*x, scale^2 (1-rho^2)(nu+x^2)/(nu+1).
  const double ub = student_t_cdf(b1, nu);
  if (ub <= 0.0) return 0.0;
  const double om = (1.0 - rho) * (1.0 + rho);
  auto f = [&](double u) {
    const double uc = std::clamp(u, 1e-15, 1.0 - 1e-15);
    const double x = student_t_quantile(uc, nu);
    const double s = std::sqrt(om * (nu + x * x) / (nu + 1.0));
    return student_t_cdf((b2 - rho * x) / s, nu + 1.0);
  };
  const double fa = f(0.0), fb = f(ub), fm = f(0.5 * ub);
  const double v = adaptive_simpson(f, 0.0, ub, fa, fm, fb, 1e-11, 28);
  return std::clamp(v, 0.0, 1.0);
}

}  // namespace skewlink::mvprob
