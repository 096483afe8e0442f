#include "skewlink/mcmc.hpp"

#include "skewlink/skewdist.hpp"
#include "skewlink/specfun.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace skewlink::mcmc {

namespace {

constexpr std::uint64_t kTagBeta = 0x6263686eu;
constexpr std::uint64_t kTagProp = 0x70726f70u;
constexpr std::uint64_t kTagCur = 0x63757265u;
constexpr std::uint64_t kTagMh = 0x6d687374u;
constexpr std::uint64_t kTagGate = 0x67636868u;
constexpr std::uint64_t kTagDic = 0x64696363u;

Matrix unit_lower(const Vector& theta, int m) {
  Matrix l = Matrix::Identity(m, m);
  int idx = 0;
  for (int j = 0; j < m; ++j)
    for (int i = j + 1; i < m; ++i) l(i, j) = theta[idx++];
  return l;
}

double log_likelihood_eval(const Vector& beta, const Matrix& sigma_bar,
                           const Vector& alpha_s,
                           const linkmodel::ModelData& data,
                           const ChainConfig& config, std::uint64_t seed) {
  if (config.log_likelihood_override)
    return config.log_likelihood_override(beta, sigma_bar, alpha_s, seed);
  mvprob::ProbEstimate est;
  if (config.kernel == Kernel::normal) {
    est = linkmodel::likelihood_sn(data, beta, sigma_bar, alpha_s,
                                   config.accuracy, seed);
  } else {
    est = linkmodel::likelihood_st(data, beta, sigma_bar, alpha_s, config.nu,
                                   config.prior.mu, config.prior.omega,
                                   config.accuracy, seed);
  }
  if (est.value <= 0.0) return -kInf;
  return std::log(std::clamp(est.value, 1e-300, 1.0 - 1e-300));
}

}  // namespace

int theta_size(int m) { return m * (m - 1) / 2; }

Matrix theta_to_corr(const Vector& theta, int m) {
  if (theta.size() != theta_size(m))
    throw ValidationError("theta_to_corr: wrong theta length");
  for (int i = 0; i < theta.size(); ++i)
    if (!std::isfinite(theta[i])) throw ValidationError("theta_to_corr: non-finite");
  const Matrix l = unit_lower(theta, m);
  const Matrix g = l * l.transpose();
  const Vector s = g.diagonal().cwiseSqrt();
  return s.cwiseInverse().asDiagonal() * g * s.cwiseInverse().asDiagonal();
}

Vector corr_to_theta(const Matrix& sigma_bar) {
  const int m = static_cast<int>(sigma_bar.rows());
  Eigen::LLT<Matrix> llt(sigma_bar);
  if (llt.info() != Eigen::Success) throw NumericalError("not positive definite");
  const Matrix c = llt.matrixL();
  Vector theta(theta_size(m));
  int idx = 0;
  for (int j = 0; j < m; ++j)
    for (int i = j + 1; i < m; ++i) theta[idx++] = c(i, j) / c(i, i);
  return theta;
}

double log_jacobian(const Vector& theta, int m) {
  if (theta.size() != theta_size(m))
    throw ValidationError("log_jacobian: wrong theta length");
  const Matrix l = unit_lower(theta, m);
  double out = 0.0;
  for (int i = 1; i < m; ++i) {
    double row = 0.0;
    for (int j = 0; j < i; ++j) row += l(i, j) * l(i, j);
    out += std::log1p(row);
  }
  return -0.5 * (m + 1) * out;
}

namespace {

double log_target_parts(const Vector& theta, const Vector& alpha_s,
                        const linkmodel::ModelData& data, const Vector& beta,
                        const ChainConfig& config, std::uint64_t seed,
                        double* loglik_out) {
  const int m = data.m();
  const Matrix sigma_bar = theta_to_corr(theta, m);
  const double ll = log_likelihood_eval(beta, sigma_bar, alpha_s, data, config, seed);
  if (loglik_out) *loglik_out = ll;
  if (ll == -kInf) return -kInf;

  double lp = ll;
  // Gaussian prior on the skewness parameters.
  lp += -0.5 * alpha_s.squaredNorm() / config.prior.alpha_var -
        0.5 * m * std::log(2.0 * M_PI * config.prior.alpha_var);
  if (config.prior.eta != 1.0) {
    Eigen::LLT<Matrix> llt(sigma_bar);
    if (llt.info() != Eigen::Success) return -kInf;
    double logdet = 0.0;
    for (int i = 0; i < m; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    lp += (config.prior.eta - 1.0) * logdet;
  }
  lp += log_jacobian(theta, m);
  return lp;
}

}  // namespace

double log_target(const Vector& theta, const Vector& alpha_s,
                  const linkmodel::ModelData& data, const Vector& beta,
                  const ChainConfig& config, std::uint64_t seed) {
  return log_target_parts(theta, alpha_s, data, beta, config, seed, nullptr);
}

MhResult mh_step_given(Vector& theta, Vector& alpha_s, const Vector& theta_prop,
                       const Vector& alpha_prop, const linkmodel::ModelData& data,
                       const Vector& beta, const ChainConfig& config, double u,
                       std::uint64_t seed_current, std::uint64_t seed_proposal) {
  MhResult res;
  const int n = data.n();
  const Matrix corr_prop = theta_to_corr(theta_prop, data.m());
  // Indicator gate on the replicated admissibility set.
  const Vector alpha_full = linkmodel::replicate_alpha(alpha_prop, n);
  bool ok = skewdist::admissible(corr_prop, alpha_prop);
  if (ok && n > 1) {
    // Replicated check via the Schur identity: I (x) corr - dd' is PD iff
    // 1 - d'(I (x) corr)^{-1} d > 0 with the replicated delta.
    Eigen::LLT<Matrix> llt(corr_prop);
    if (llt.info() != Eigen::Success) {
      ok = false;
    } else {
      Vector sba(alpha_full.size());
      const int m = data.m();
      for (int i = 0; i < n; ++i)
        sba.segment(i * m, m) = corr_prop * alpha_full.segment(i * m, m);
      const double denom = 1.0 + alpha_full.dot(sba);
      // delta'(I (x) corr)^{-1} delta = a'(I (x) corr)a / (1 + a'(I (x) corr)a)
      ok = (1.0 - alpha_full.dot(sba) / denom) > 1e-10;
    }
  }
  res.admissible = ok;

  double ll_cur = -kInf;
  const double lt_cur =
      log_target_parts(theta, alpha_s, data, beta, config, seed_current, &ll_cur);
  if (!ok) {
    res.accepted = false;
    res.log_target_state = lt_cur;
    res.loglik_state = ll_cur;
    return res;
  }
  double ll_prop = -kInf;
  const double lt_prop = log_target_parts(theta_prop, alpha_prop, data, beta,
                                          config, seed_proposal, &ll_prop);
  const double delta = lt_prop - lt_cur;
  if (std::log(u) < std::fmin(0.0, delta)) {
    theta = theta_prop;
    alpha_s = alpha_prop;
    res.accepted = true;
    res.log_target_state = lt_prop;
    res.loglik_state = ll_prop;
    return res;
  }
  res.accepted = false;
  res.log_target_state = lt_cur;
  res.loglik_state = ll_cur;
  return res;
}

MhResult mh_step(Vector& theta, Vector& alpha_s, const linkmodel::ModelData& data,
                 const Vector& beta, const ChainConfig& config, CounterRng& rng,
                 std::uint64_t seed_current, std::uint64_t seed_proposal) {
  if (!(config.h1 > 0.0) || !(config.h2 > 0.0))
    throw ValidationError("mh_step: proposal variances must be positive");
  Vector alpha_prop = alpha_s;
  if (config.sample_alpha) {
    for (int i = 0; i < alpha_prop.size(); ++i)
      alpha_prop[i] += std::sqrt(config.h1) * normal_draw(rng);
  }
  Vector theta_prop = theta;
  if (config.sample_corr) {
    for (int i = 0; i < theta_prop.size(); ++i)
      theta_prop[i] += std::sqrt(config.h2) * normal_draw(rng);
  }
  const double u = rng.next_double();
  return mh_step_given(theta, alpha_s, theta_prop, alpha_prop, data, beta, config,
                       u, seed_current, seed_proposal);
}

ChainDraws run_chain(const linkmodel::ModelData& data, const ChainConfig& config) {
  linkmodel::validate(data);
  if (config.burn_in < 0 || config.burn_in >= config.iterations)
    throw ValidationError("run_chain: need 0 <= burn_in < iterations");
  if (config.kernel == Kernel::student && !(config.nu > 0.0))
    throw ValidationError("invalid df");
  const int m = data.m(), p = data.p();
  if (config.prior.mu.size() != p || config.prior.omega.rows() != p)
    throw ValidationError("run_chain: prior dimension mismatch");

  const int j = theta_size(m);
  Vector theta = config.theta_init.size() ? config.theta_init : Vector::Zero(j);
  Vector alpha_s = config.alpha_init.size() ? config.alpha_init : Vector::Zero(m);
  if (theta.size() != j || alpha_s.size() != m)
    throw ValidationError("run_chain: bad initial state size");
  Vector beta = config.prior.mu;

  const int kept_n = config.iterations - config.burn_in;
  ChainDraws out;
  out.iterations = config.iterations;
  out.burn_in = config.burn_in;
  out.beta.resize(kept_n, p);
  out.sigma_bar.resize(kept_n, config.sample_corr ? j : 0);
  out.alpha.resize(kept_n, config.sample_alpha ? m : 0);
  out.loglik.resize(kept_n);

  const bool run_mh = config.sample_alpha || config.sample_corr;
  CounterRng mh_rng(mix_seed(config.seed, kTagMh), 0);

  // The coefficient sampler depends only on (sigma_bar, alpha); rebuild it
  // when the MH block moves.
  Matrix sigma_bar = theta_to_corr(theta, m);
  std::unique_ptr<linkmodel::BetaSampler> beta_sampler;
  auto rebuild = [&](int iter) {
    const auto post = linkmodel::posterior_params(data, config.prior, sigma_bar,
                                                  alpha_s, config.kernel, config.nu);
    beta_sampler = std::make_unique<linkmodel::BetaSampler>(
        post, config.trunc, mix_seed(config.seed, mix_seed(kTagGate, iter)));
  };
  rebuild(0);

  for (int k = 1; k <= config.iterations; ++k) {
    const auto bs =
        beta_sampler->draw(1, mix_seed(config.seed, mix_seed(kTagBeta, k)));
    beta = bs.draws.row(0).transpose();
    if (bs.trunc.method == truncsample::Method::rejection)
      ++out.rejection_draws;
    else
      ++out.chain_draws;

    double loglik;
    if (run_mh) {
      const auto res = mh_step(theta, alpha_s, data, beta, config, mh_rng,
                               mix_seed(config.seed, mix_seed(kTagCur, k)),
                               mix_seed(config.seed, mix_seed(kTagProp, k)));
      ++out.mh_steps;
      if (res.accepted) {
        ++out.accepted;
        sigma_bar = theta_to_corr(theta, m);
        rebuild(k);
      }
      if (!res.admissible) ++out.indicator_rejections;
      loglik = res.loglik_state;
    } else {
      loglik = log_likelihood_eval(beta, sigma_bar, alpha_s, data, config,
                                   mix_seed(config.seed, mix_seed(kTagCur, k)));
    }

    if (k > config.burn_in) {
      const int row = k - config.burn_in - 1;
      out.beta.row(row) = beta.transpose();
      if (config.sample_corr) {
        int idx = 0;
        for (int cj = 0; cj < m; ++cj)
          for (int ci = cj + 1; ci < m; ++ci)
            out.sigma_bar(row, idx++) = sigma_bar(ci, cj);
      }
      if (config.sample_alpha) out.alpha.row(row) = alpha_s.transpose();
      out.loglik[row] = loglik;
    }
  }
  return out;
}

Matrix project_to_correlation(const Matrix& a, double min_eig) {
  Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Vector ev = es.eigenvalues().cwiseMax(min_eig);
  Matrix out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  const Vector d = out.diagonal().cwiseSqrt();
  out = d.cwiseInverse().asDiagonal() * out * d.cwiseInverse().asDiagonal();
  out.diagonal().setOnes();
  return out;
}

DicReport dic(const ChainDraws& draws, const linkmodel::ModelData& data,
              const ChainConfig& config) {
  const int kept_n = static_cast<int>(draws.loglik.size());
  if (kept_n < 1) throw ValidationError("dic: empty draws");
  const int m = data.m();

  DicReport rep;
  rep.d_bar = -2.0 * draws.loglik.mean();

  const Vector beta_mean = draws.beta.colwise().mean().transpose();
  Vector alpha_mean = config.sample_alpha
                          ? Vector(draws.alpha.colwise().mean().transpose())
                          : (config.alpha_init.size() ? config.alpha_init
                                                      : Vector::Zero(m));
  Matrix sigma_mean = Matrix::Identity(m, m);
  if (config.sample_corr) {
    const Vector v = draws.sigma_bar.colwise().mean().transpose();
    int idx = 0;
    for (int cj = 0; cj < m; ++cj)
      for (int ci = cj + 1; ci < m; ++ci) {
        sigma_mean(ci, cj) = v[idx];
        sigma_mean(cj, ci) = v[idx];
        ++idx;
      }
    sigma_mean = project_to_correlation(sigma_mean);
  } else if (config.theta_init.size()) {
    sigma_mean = theta_to_corr(config.theta_init, m);
  }

  ChainConfig tight = config;
  tight.accuracy.rel_target = std::fmin(config.accuracy.rel_target, 1e-3);
  tight.accuracy.max_evaluations =
      std::max<std::size_t>(config.accuracy.max_evaluations, 200000);
  const double ll_mean =
      log_likelihood_eval(beta_mean, sigma_mean, alpha_mean, data, tight,
                          mix_seed(config.seed, kTagDic));
  if (ll_mean == -kInf) throw NumericalError("dic: likelihood failed at the posterior mean");
  rep.d_at_mean = -2.0 * ll_mean;
  rep.p_d = rep.d_bar - rep.d_at_mean;
  rep.dic = rep.d_at_mean + 2.0 * rep.p_d;
  return rep;
}

}  // namespace skewlink::mcmc
