#include "skewlink/truncsample.hpp"

#include "skewlink/mvprob.hpp"
#include "skewlink/specfun.hpp"

#include <algorithm>
#include <cmath>

namespace skewlink::truncsample {

namespace {

constexpr std::uint64_t kTagGate = 0x67617465u;
constexpr std::uint64_t kTagDraw = 0x64726177u;
constexpr std::uint64_t kTagChain = 0x636e6861u;

// Hazard phi(eta)/Phic(eta), stable across both tails.
double hazard(double eta) {
  if (eta == -kInf) return 0.0;
  const double lpdf = -0.5 * eta * eta - 0.9189385332046727;
  return std::exp(lpdf - norm_logcdf(-eta));
}

double log_tail(double eta) {  // ln Phic(eta)
  return (eta == -kInf) ? 0.0 : norm_logcdf(-eta);
}

}  // namespace

double tn_lower_std(double a, CounterRng& rng) {
  if (a == -kInf) return normal_draw(rng);
  if (a <= 6.0) {
    // P(X >= x | X >= a): invert the complementary cdf.
    const double p = norm_cdf(-a);
    const double u = rng.next_double();
    return -norm_quantile(std::fmax(p * u, 5e-324));
  }
  // Shifted exponential rejection (Robert 1995) for the deep tail.
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double e = -std::log(rng.next_double()) / lambda;
    const double z = a + e;
    const double d = z - lambda;
    if (rng.next_double() <= std::exp(-0.5 * d * d)) return z;
  }
}

namespace detail {

double tilt_psi(const Matrix& strict_lower, const Vector& l_std, const Vector& z,
                const Vector& mu) {
  const int d = static_cast<int>(l_std.size());
  double psi = 0.0;
  for (int i = 0; i < d; ++i) {
    double lt = l_std[i];
    if (lt != -kInf) {
      for (int j = 0; j < i; ++j) lt -= strict_lower(i, j) * z[j];
    }
    const double eta = (lt == -kInf) ? -kInf : lt - mu[i];
    psi += log_tail(eta) + 0.5 * mu[i] * mu[i] - mu[i] * z[i];
  }
  return psi;
}

TiltSolution solve_tilting(const Matrix& strict_lower, const Vector& l_std) {
  const int d = static_cast<int>(l_std.size());
  TiltSolution sol;
  sol.mu = Vector::Zero(d);
  sol.z = Vector::Zero(d);
  if (d == 1) {
    sol.psi_star = log_tail(l_std[0]);
    sol.converged = true;
    return sol;
  }
  const int nv = d - 1;
  Vector y = Vector::Zero(2 * nv);  // (z_0..z_{d-2}, mu_0..mu_{d-2})

  Vector eta(d), p(d), dp(d);
  auto fill_grad = [&](const Vector& yy, Vector& grad) {
    for (int i = 0; i < d; ++i) {
      double lt = l_std[i];
      if (lt != -kInf) {
        for (int j = 0; j < std::min(i, nv); ++j) lt -= strict_lower(i, j) * yy[j];
      }
      const double mu_i = (i < nv) ? yy[nv + i] : 0.0;
      eta[i] = (lt == -kInf) ? -kInf : lt - mu_i;
      p[i] = hazard(eta[i]);
      dp[i] = (eta[i] == -kInf) ? 0.0 : p[i] * (p[i] - eta[i]);
    }
    for (int j = 0; j < nv; ++j) {
      double g = -yy[nv + j];
      for (int i = j + 1; i < d; ++i) g += p[i] * strict_lower(i, j);
      grad[j] = g;
      grad[nv + j] = p[j] + yy[nv + j] - yy[j];
    }
  };

  Vector grad(2 * nv), trial_grad(2 * nv);
  Matrix hess(2 * nv, 2 * nv);
  fill_grad(y, grad);
  double gnorm = grad.norm();
  bool converged = false;
  for (int iter = 0; iter < 120 && !converged; ++iter) {
    hess.setZero();
    for (int j = 0; j < nv; ++j) {
      for (int k = 0; k <= j; ++k) {
        double h = 0.0;
        for (int i = j + 1; i < d; ++i)
          h -= dp[i] * strict_lower(i, j) * strict_lower(i, k);
        hess(j, k) = h;
        hess(k, j) = h;
      }
      for (int i = j + 1; i < nv; ++i) {
        const double v = -dp[i] * strict_lower(i, j);
        hess(j, nv + i) = v;
        hess(nv + i, j) = v;
      }
      hess(j, nv + j) = -dp[j] * strict_lower(j, j) - 1.0;  // strict_lower(j,j)=0
      hess(nv + j, j) = hess(j, nv + j);
      hess(nv + j, nv + j) = 1.0 - dp[j];
    }
    // Damped Newton with a Levenberg fallback when the solve is poor.
    double lambda = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
      Matrix h = hess;
      if (lambda > 0.0) h.diagonal().array() += lambda;
      Vector step = h.ldlt().solve(-grad);
      if (!step.allFinite()) {
        lambda = (lambda == 0.0) ? 1e-4 : lambda * 100.0;
        continue;
      }
      double t = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 30; ++ls) {
        Vector trial = y + t * step;
        fill_grad(trial, trial_grad);
        if (trial_grad.allFinite() && trial_grad.norm() < gnorm) {
          y = trial;
          grad = trial_grad;
          gnorm = grad.norm();
          improved = true;
          break;
        }
        t *= 0.5;
      }
      if (improved) break;
      lambda = (lambda == 0.0) ? 1e-4 : lambda * 100.0;
    }
    if (gnorm < 1e-9) converged = true;
  }

  sol.z.head(nv) = y.head(nv);
  sol.mu.head(nv) = y.tail(nv);
  sol.mu[d - 1] = 0.0;
  sol.psi_star = tilt_psi(strict_lower, l_std, sol.z, sol.mu);
  sol.converged = converged;
  if (!converged) {
    // Zero tilting is always a valid envelope: psi(z,0) <= 0.
    sol.mu.setZero();
    sol.z.setZero();
    sol.psi_star = 0.0;
  }
  return sol;
}

}  // namespace detail

TmvSampler::TmvSampler(TruncationProblem problem, Config config, std::uint64_t seed)
    : problem_(std::move(problem)), config_(std::move(config)) {
  dim_ = static_cast<int>(problem_.lower.size());
  if (dim_ < 1 || problem_.scale.rows() != dim_ || problem_.scale.cols() != dim_)
    throw ValidationError("truncsample: dimension mismatch");
  if (problem_.df && !(*problem_.df > 0.0)) throw ValidationError("invalid df");
  untruncated_ = true;
  scale_free_bounds_ = true;
  for (int i = 0; i < dim_; ++i) {
    const double l = problem_.lower[i];
    if (std::isnan(l) || l == kInf)
      throw ValidationError("truncsample: invalid lower bound");
    if (l != -kInf) untruncated_ = false;
    if (l != -kInf && l != 0.0) scale_free_bounds_ = false;
  }
  chol_plain_ = jittered_cholesky(problem_.scale);
  if (untruncated_) {
    plan_.method = Method::rejection;
    plan_.acceptance_rate = 1.0;
    plan_.acceptance_estimate = 1.0;
    return;
  }

  const bool tilted_path = !problem_.df || scale_free_bounds_;
  double log_envelope = 0.0;
  if (tilted_path) {
    // Restrictive-first ordering, then a row-standardized factor for the
    // sequential tilted proposal.
    mvprob::ReorderedCholesky rc;
    double jitter = 0.0;
    double base = 1e-10 * problem_.scale.trace() / dim_;
    if (base <= 0.0) base = 1e-14;
    for (int attempt = 0;; ++attempt) {
      Matrix c = problem_.scale;
      if (jitter > 0.0) c.diagonal().array() += jitter;
      try {
        rc = mvprob::reorder_cholesky(c, -problem_.lower);
        break;
      } catch (const NumericalError&) {
        if (attempt >= 3) throw;
        jitter = (jitter == 0.0) ? base : jitter * 10.0;
      }
    }
    perm_ = rc.permutation;
    chol_ = rc.lower;
    l_std_.resize(dim_);
    strict_ = Matrix::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      const double di = chol_(i, i);
      l_std_[i] = (rc.upper[i] == kInf) ? -kInf : -rc.upper[i] / di;
      for (int j = 0; j < i; ++j) strict_(i, j) = chol_(i, j) / di;
    }
    const auto sol = detail::solve_tilting(strict_, l_std_);
    tilt_mu_ = sol.mu;
    psi_star_ = sol.psi_star + 1e-9;
    log_envelope = psi_star_;
  }
  plan_.log_envelope = log_envelope;

  // Tier gate: region probability from a cheap lattice estimate, divided by
  // the envelope constant for the tilted path.
  mvprob::QmcConfig gate;
  gate.shifts = 6;
  gate.initial_points = std::max<std::size_t>(64, config_.gate_points);
  gate.max_evaluations = 6 * gate.initial_points;
  gate.abs_target = 0.0;
  gate.parallel = false;
  double region = 0.0;
  if (!problem_.df || scale_free_bounds_) {
    mvprob::GaussianProblem gp{-problem_.lower, problem_.scale, Vector()};
    region = mvprob::mvn_cdf(gp, gate, mix_seed(seed, kTagGate)).value;
  } else {
    mvprob::StudentProblem sp;
    sp.upper = -problem_.lower;
    sp.covariance = problem_.scale;
    sp.df = *problem_.df;
    region = mvprob::mvt_cdf(sp, gate, mix_seed(seed, kTagGate)).value;
  }
  double rate = 0.0;
  if (region > 0.0)
    rate = std::exp(std::fmin(0.0, std::log(region) - log_envelope));
  plan_.acceptance_estimate = rate;

  Method method =
      (rate >= config_.min_acceptance) ? Method::rejection : Method::chain;
  if (config_.force_method) method = *config_.force_method;
  plan_.method = method;

  if (method == Method::rejection) {
    attempt_cap_ = static_cast<std::uint64_t>(
        std::fmin(5e7, std::fmax(2000.0, 200.0 / std::fmax(rate, 1e-7))));
  }
  // Chain-tier state is always prepared so the rejection tier can fall back.
  Eigen::LLT<Matrix> llt(problem_.scale);
  Matrix scale_pd = problem_.scale;
  if (llt.info() != Eigen::Success) {
    scale_pd = chol_plain_ * chol_plain_.transpose();
    llt.compute(scale_pd);
  }
  precision_ = llt.solve(Matrix::Identity(dim_, dim_));
  cond_sd_ = precision_.diagonal().cwiseInverse().cwiseSqrt();
  start_.resize(dim_);
  for (int i = 0; i < dim_; ++i) {
    const double l = problem_.lower[i];
    start_[i] = (l == -kInf) ? 0.0 : l + 0.5 * std::sqrt(scale_pd(i, i));
  }
  plan_.burn_in = config_.burn_in;
}

Vector TmvSampler::draw_rejection_one(CounterRng& rng, std::uint64_t* proposals,
                                      std::uint64_t* violations, bool* ok) const {
  const int d = dim_;
  Vector z(d), y(d);
  for (std::uint64_t attempt = 0; attempt < attempt_cap_; ++attempt) {
    ++*proposals;
    double logratio = 0.0;
    for (int i = 0; i < d; ++i) {
      double lt = l_std_[i];
      if (lt != -kInf) {
        for (int j = 0; j < i; ++j) lt -= strict_(i, j) * z[j];
      }
      const double mu = tilt_mu_[i];
      const double eta = (lt == -kInf) ? -kInf : lt - mu;
      z[i] = mu + tn_lower_std(eta, rng);
      logratio += log_tail(eta) + 0.5 * mu * mu - mu * z[i];
    }
    if (logratio > psi_star_) ++*violations;
    if (std::log(rng.next_double()) <= logratio - psi_star_) {
      for (int i = 0; i < d; ++i) {
        double v = 0.0;
        for (int j = 0; j <= i; ++j) v += chol_(i, j) * z[j];
        y[perm_[i]] = v;
      }
      *ok = true;
      return y;
    }
  }
  *ok = false;
  return y;
}

void TmvSampler::chain_sweep(Vector& x, Vector& r, double& qform, double w,
                             CounterRng& rng) const {
  const int d = dim_;
  const double sfac = problem_.df ? std::sqrt(*problem_.df / w) : 1.0;
  for (int i = 0; i < d; ++i) {
    const double qii = precision_(i, i);
    const double m = x[i] - r[i] / qii;
    const double sd = cond_sd_[i] * sfac;
    const double l = problem_.lower[i];
    double nx;
    if (l == -kInf)
      nx = m + sd * normal_draw(rng);
    else
      nx = m + sd * tn_lower_std((l - m) / sd, rng);
    const double dx = nx - x[i];
    if (dx != 0.0) {
      r += precision_.col(i) * dx;
      x[i] = nx;
    }
  }
  qform = x.dot(r);
}

Sample TmvSampler::draw(std::size_t count, std::uint64_t seed) const {
  Sample out;
  out.diagnostics = plan_;
  out.draws.resize(count, dim_);
  if (count == 0) return out;
  const double nu = problem_.df.value_or(0.0);

  if (untruncated_) {
    const CounterRng base(mix_seed(seed, kTagDraw), 0);
    for (std::size_t i = 0; i < count; ++i) {
      CounterRng rng = base.substream(i);
      Vector z(dim_);
      for (int j = 0; j < dim_; ++j) z[j] = normal_draw(rng);
      Vector y = chol_plain_ * z;
      if (problem_.df) y /= std::sqrt(chisq_draw(rng, nu) / nu);
      out.draws.row(i) = y.transpose();
    }
    out.diagnostics.proposals = count;
    return out;
  }

  if (plan_.method == Method::rejection) {
    const CounterRng base(mix_seed(seed, kTagDraw), 0);
    std::vector<std::uint64_t> proposals(count, 0), violations(count, 0);
    std::vector<char> ok(count, 1);
    const bool tilted_path = !problem_.df || scale_free_bounds_;

#pragma omp parallel for schedule(static) if (config_.parallel)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
      CounterRng rng = base.substream(static_cast<std::uint64_t>(i));
      bool good = false;
      Vector y;
      if (tilted_path) {
        double w = 1.0;
        if (problem_.df) w = chisq_draw(rng, nu);  // mixing draw first
        y = draw_rejection_one(rng, &proposals[i], &violations[i], &good);
        if (good && problem_.df) y *= std::sqrt(nu / w);
      } else {
        // Plain accept-reject from the untruncated t.
        Vector z(dim_);
        for (std::uint64_t attempt = 0; attempt < attempt_cap_ && !good; ++attempt) {
          ++proposals[i];
          for (int j = 0; j < dim_; ++j) z[j] = normal_draw(rng);
          const double w = chisq_draw(rng, nu);
          y = (chol_plain_ * z) / std::sqrt(w / nu);
          good = true;
          for (int j = 0; j < dim_; ++j) {
            if (y[j] < problem_.lower[j]) {
              good = false;
              break;
            }
          }
        }
      }
      if (good)
        out.draws.row(i) = y.transpose();
      else
        ok[i] = 0;
    }

    bool all_ok = true;
    std::uint64_t total = 0, viol = 0;
    for (std::size_t i = 0; i < count; ++i) {
      all_ok = all_ok && ok[i];
      total += proposals[i];
      viol += violations[i];
    }
    if (all_ok) {
      out.diagnostics.proposals = total;
      out.diagnostics.acceptance_rate =
          static_cast<double>(count) / static_cast<double>(total);
      out.diagnostics.envelope_violations = viol;
      return out;
    }
    out.diagnostics.method = Method::chain;  // fall through
  }

  // Coordinatewise chain tier.
  CounterRng rng(mix_seed(seed, kTagChain), 0);
  Vector x = start_;
  Vector r = precision_ * x;
  double qform = x.dot(r);
  double w = 1.0;
  const int d = dim_;
  for (int b = 0; b < config_.burn_in; ++b) {
    if (problem_.df)
      w = gamma_draw(rng, 0.5 * (nu + d), 2.0 / (1.0 + qform / nu));
    chain_sweep(x, r, qform, w, rng);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (problem_.df)
      w = gamma_draw(rng, 0.5 * (nu + d), 2.0 / (1.0 + qform / nu));
    chain_sweep(x, r, qform, w, rng);
    out.draws.row(i) = x.transpose();
  }
  out.diagnostics.method = Method::chain;
  out.diagnostics.burn_in = config_.burn_in;
  // Effective sample size from the first coordinate's autocorrelation.
  if (count >= 8) {
    const Vector colv = out.draws.col(0);
    const double mean = colv.mean();
    const double var = (colv.array() - mean).square().sum() / count;
    double rho_sum = 0.0;
    if (var > 0.0) {
      const int max_lag = static_cast<int>(std::min<std::size_t>(count / 2, 200));
      for (int lag = 1; lag <= max_lag; ++lag) {
        double c = 0.0;
        for (std::size_t t = lag; t < count; ++t)
          c += (colv[t] - mean) * (colv[t - lag] - mean);
        c /= count * var;
        if (c <= 0.0) break;
        rho_sum += c;
      }
    }
    out.diagnostics.ess = count / (1.0 + 2.0 * rho_sum);
  }
  return out;
}

Sample sample_tmvn(const TruncationProblem& problem, std::size_t count,
                   std::uint64_t seed, const Config& config) {
  if (problem.df) throw ValidationError("sample_tmvn: df must be absent");
  TmvSampler sampler(problem, config, seed);
  return sampler.draw(count, seed);
}

Sample sample_tmvt(const TruncationProblem& problem, std::size_t count,
                   std::uint64_t seed, const Config& config) {
  if (!problem.df) throw ValidationError("sample_tmvt: df required");
  TmvSampler sampler(problem, config, seed);
  return sampler.draw(count, seed);
}

}  // namespace skewlink::truncsample
