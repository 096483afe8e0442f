#include "skewlink/linkmodel.hpp"

#include "skewlink/specfun.hpp"

#include <cmath>

namespace skewlink::linkmodel {

namespace {

constexpr std::uint64_t kTagOracle = 0x6f72636cu;
constexpr std::uint64_t kTagBeta0 = 0x62657430u;
constexpr std::uint64_t kTagBeta1 = 0x62657431u;
constexpr std::uint64_t kTagGate = 0x6267746eu;

Matrix kron_identity(const Matrix& sigma, int n) {
  const int m = static_cast<int>(sigma.rows());
  Matrix out = Matrix::Zero(n * m, n * m);
  for (int i = 0; i < n; ++i) out.block(i * m, i * m, m, m) = sigma;
  return out;
}

Vector corr_diag_sqrt(const Matrix& sigma) { return sigma.diagonal().cwiseSqrt(); }

}  // namespace

void validate(const ModelData& data) {
  const int n = data.n(), m = data.m();
  if (n < 1 || m < 1) throw ValidationError("linkmodel: empty panel");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const int v = data.panel(i, j);
      if (v != 0 && v != 1) throw ValidationError("linkmodel: panel entries must be 0/1");
    }
  }
  if (data.design.rows() != static_cast<Eigen::Index>(n) * m)
    throw ValidationError("linkmodel: design must have n*M rows");
  if (data.design.cols() < 1) throw ValidationError("linkmodel: empty design");
}

SignStructure build_sign_structure(const ModelData& data) {
  validate(data);
  const int n = data.n(), m = data.m(), p = data.p();
  SignStructure s;
  s.d.resize(n * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) s.d[i * m + j] = 2.0 * data.panel(i, j) - 1.0;
  s.dstar = Matrix::Zero(n * m + 1, p);
  s.dstar.bottomRows(n * m) = s.d.asDiagonal() * data.design;
  return s;
}

Vector replicate_alpha(const Vector& alpha_s, int n) {
  const int m = static_cast<int>(alpha_s.size());
  Vector out(n * m);
  for (int i = 0; i < n; ++i) out.segment(i * m, m) = alpha_s;
  return out;
}

BorderedScale build_bordered_scale(const Matrix& sigma, const Vector& alpha_full,
                                   int n, const Vector& d_signs) {
  const int m = static_cast<int>(sigma.rows());
  const int nm = n * m;
  if (alpha_full.size() != nm || d_signs.size() != nm)
    throw ValidationError("build_bordered_scale: dimension mismatch");

  const Vector sd = corr_diag_sqrt(sigma);
  const Matrix sigma_bar =
      sd.cwiseInverse().asDiagonal() * sigma * sd.cwiseInverse().asDiagonal();

  // delta on the replicated scale: (1 + a'(I (x) Sb)a)^{-1/2} (I (x) Sb) a.
  Vector sba(nm);
  for (int i = 0; i < n; ++i)
    sba.segment(i * m, m) = sigma_bar * alpha_full.segment(i * m, m);
  const Vector delta = sba / std::sqrt(1.0 + alpha_full.dot(sba));

  BorderedScale out;
  out.sigma_star = Matrix::Zero(nm + 1, nm + 1);
  out.sigma_star(0, 0) = 1.0;
  Vector border(nm);
  for (int i = 0; i < n; ++i)
    border.segment(i * m, m) =
        sd.cwiseProduct(delta.segment(i * m, m));  // (I_n (x) sigma) delta
  border = d_signs.cwiseProduct(border);           // then D
  out.sigma_star.block(0, 1, 1, nm) = -border.transpose();
  out.sigma_star.block(1, 0, nm, 1) = -border;
  for (int bi = 0; bi < n; ++bi)
    out.sigma_star.block(1 + bi * m, 1 + bi * m, m, m) = sigma;
  // Apply D on both sides of the latent block.
  for (int i = 0; i < nm; ++i)
    for (int j = 0; j < nm; ++j)
      out.sigma_star(1 + i, 1 + j) *= d_signs[i] * d_signs[j];

  out.sigma_star_sd = out.sigma_star.diagonal().cwiseSqrt();
  out.sigma_star_bar = out.sigma_star_sd.cwiseInverse().asDiagonal() *
                       out.sigma_star *
                       out.sigma_star_sd.cwiseInverse().asDiagonal();
  return out;
}

namespace {

mvprob::ProbEstimate clamp2(mvprob::ProbEstimate est) {
  est.value = std::clamp(2.0 * est.value, 0.0, 1.0);
  est.error *= 2.0;
  return est;
}

// With alpha = 0 the border decouples and the probability reduces to an
// nM-dimensional evaluation; diagonal Sigma then factorizes exactly for the
// normal kernel.
bool alpha_is_zero(const Vector& a) { return a.isZero(0.0); }

bool is_diagonal(const Matrix& s) {
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < i; ++j)
      if (s(i, j) != 0.0 || s(j, i) != 0.0) return false;
  return true;
}

}  // namespace

mvprob::ProbEstimate likelihood_sn(const ModelData& data, const Vector& beta,
                                   const Matrix& sigma, const Vector& alpha_s,
                                   const mvprob::QmcConfig& config,
                                   std::uint64_t seed) {
  validate(data);
  const int n = data.n(), m = data.m(), nm = n * m;
  if (beta.size() != data.p()) throw ValidationError("likelihood_sn: beta size");
  if (sigma.rows() != m) throw ValidationError("likelihood_sn: sigma size");
  const Vector alpha_full = (alpha_s.size() == nm)
                                ? alpha_s
                                : replicate_alpha(alpha_s, n);
  const SignStructure ss = build_sign_structure(data);
  const Vector xb = data.design * beta;
  const Vector dxb = ss.d.cwiseProduct(xb);

  if (alpha_is_zero(alpha_full)) {
    if (is_diagonal(sigma)) {
      double logp = 0.0;
      for (int i = 0; i < nm; ++i)
        logp += norm_logcdf(dxb[i] / std::sqrt(sigma(i % m, i % m)));
      return {std::exp(logp), 0.0, 0};
    }
    Matrix cov = kron_identity(sigma, n);
    cov = ss.d.asDiagonal() * cov * ss.d.asDiagonal();
    mvprob::GaussianProblem pb{dxb, std::move(cov), Vector()};
    return mvprob::mvn_cdf(pb, config, seed);
  }

  const BorderedScale bs = build_bordered_scale(sigma, alpha_full, n, ss.d);
  Vector upper(nm + 1);
  upper[0] = 0.0;
  upper.tail(nm) = dxb;
  mvprob::GaussianProblem pb{std::move(upper), bs.sigma_star, Vector()};
  return clamp2(mvprob::mvn_cdf(pb, config, seed));
}

mvprob::ProbEstimate likelihood_st(const ModelData& data, const Vector& beta,
                                   const Matrix& sigma, const Vector& alpha_s,
                                   double nu, const Vector& prior_mu,
                                   const Matrix& prior_omega,
                                   const mvprob::QmcConfig& config,
                                   std::uint64_t seed) {
  validate(data);
  if (!(nu > 0.0)) throw ValidationError("invalid df");
  const int n = data.n(), m = data.m(), nm = n * m, p = data.p();
  if (beta.size() != p || prior_mu.size() != p || prior_omega.rows() != p)
    throw ValidationError("likelihood_st: prior dimension mismatch");
  const Vector alpha_full = (alpha_s.size() == nm)
                                ? alpha_s
                                : replicate_alpha(alpha_s, n);

  Eigen::LLT<Matrix> llt(prior_omega);
  if (llt.info() != Eigen::Success) throw NumericalError("not positive definite");
  const double q = llt.matrixL().solve(beta - prior_mu).squaredNorm();
  const double scale = std::sqrt((nu + p) / (nu + q));

  const SignStructure ss = build_sign_structure(data);
  const Vector dxb = scale * ss.d.cwiseProduct(data.design * beta);

  if (alpha_is_zero(alpha_full)) {
    Matrix cov = kron_identity(sigma, n);
    cov = ss.d.asDiagonal() * cov * ss.d.asDiagonal();
    mvprob::StudentProblem pb;
    pb.upper = dxb;
    pb.covariance = std::move(cov);
    pb.df = nu + p;
    return mvprob::mvt_cdf(pb, config, seed);
  }

  const BorderedScale bs = build_bordered_scale(sigma, alpha_full, n, ss.d);
  Vector upper(nm + 1);
  upper[0] = 0.0;
  upper.tail(nm) = dxb;
  mvprob::StudentProblem pb;
  pb.upper = std::move(upper);
  pb.covariance = bs.sigma_star;
  pb.df = nu + p;
  return clamp2(mvprob::mvt_cdf(pb, config, seed));
}

std::vector<double> generative_oracle(const Vector& beta, const Matrix& sigma,
                                      const Vector& alpha_s, Kernel kernel,
                                      double nu, const Vector& prior_mu,
                                      const Matrix& prior_omega,
                                      const Matrix& design, int n, int m,
                                      std::size_t count, std::uint64_t seed,
                                      bool parallel) {
  const int nm = n * m;
  if (nm > 20) throw ValidationError("generative_oracle: nM too large to enumerate");
  const Vector alpha_full =
      (alpha_s.size() == nm) ? alpha_s : replicate_alpha(alpha_s, n);
  const Vector xb = design * beta;

  skewdist::SkewEllipticalParams eps_law;
  eps_law.xi = Vector::Zero(nm);
  eps_law.alpha = alpha_full;
  if (kernel == Kernel::normal) {
    eps_law.sigma = kron_identity(sigma, n);
    eps_law.kernel = Kernel::normal;
  } else {
    // eps | beta is skew-t with an inflated scale and df nu + p.
    if (!(nu > 0.0)) throw ValidationError("invalid df");
    Eigen::LLT<Matrix> llt(prior_omega);
    if (llt.info() != Eigen::Success) throw NumericalError("not positive definite");
    const double q = llt.matrixL().solve(beta - prior_mu).squaredNorm();
    const int p = static_cast<int>(beta.size());
    eps_law.sigma = ((nu + q) / (nu + p)) * kron_identity(sigma, n);
    eps_law.kernel = Kernel::student;
    eps_law.nu = nu + p;
  }

  const std::size_t n_outcomes = std::size_t{1} << nm;
  std::vector<std::uint64_t> counts(n_outcomes, 0);

  const std::size_t block = 16384;
  const std::size_t n_blocks = (count + block - 1) / block;
  std::vector<std::vector<std::uint64_t>> partial(n_blocks);

#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(n_blocks); ++b) {
    const std::size_t lo = b * block;
    const std::size_t hi = std::min(count, lo + block);
    std::vector<std::uint64_t> local(n_outcomes, 0);
    const Matrix eps =
        (eps_law.kernel == Kernel::normal)
            ? skewdist::sample_sn(eps_law, hi - lo,
                                  mix_seed(seed, kTagOracle + b))
            : skewdist::sample_st(eps_law, hi - lo,
                                  mix_seed(seed, kTagOracle + b));
    for (std::size_t r = 0; r < hi - lo; ++r) {
      std::size_t mask = 0;
      for (int k = 0; k < nm; ++k) {
        if (xb[k] + eps(r, k) > 0.0) mask |= (std::size_t{1} << k);
      }
      ++local[mask];
    }
    partial[b] = std::move(local);
  }
  for (const auto& local : partial)
    for (std::size_t o = 0; o < n_outcomes; ++o) counts[o] += local[o];

  std::vector<double> freq(n_outcomes);
  for (std::size_t o = 0; o < n_outcomes; ++o)
    freq[o] = static_cast<double>(counts[o]) / static_cast<double>(count);
  return freq;
}

SuePosterior posterior_params(const ModelData& data, const PriorSpec& prior,
                              const Matrix& sigma, const Vector& alpha_s,
                              Kernel kernel, double nu) {
  validate(data);
  const int n = data.n(), m = data.m(), nm = n * m, p = data.p();
  if (prior.mu.size() != p || prior.omega.rows() != p || prior.omega.cols() != p)
    throw ValidationError("posterior_params: prior dimension mismatch");
  if (kernel == Kernel::student && !(nu > 0.0)) throw ValidationError("invalid df");

  const Vector alpha_full =
      (alpha_s.size() == nm) ? alpha_s : replicate_alpha(alpha_s, n);
  const SignStructure ss = build_sign_structure(data);
  const BorderedScale bs = build_bordered_scale(sigma, alpha_full, n, ss.d);

  SuePosterior post;
  post.mu_post = prior.mu;
  post.omega_post = prior.omega;
  post.omega_sd = prior.omega.diagonal().cwiseSqrt();
  post.lambda_post = bs.sigma_star_sd.cwiseInverse().asDiagonal() * ss.dstar *
                     post.omega_sd.asDiagonal();
  post.tau_post =
      bs.sigma_star_sd.cwiseInverse().asDiagonal() * (ss.dstar * prior.mu);
  post.gamma_post = bs.sigma_star_bar;
  post.kernel = kernel;
  post.nu = nu;
  post.dstar = ss.dstar;
  post.sigma_star = bs.sigma_star;
  return post;
}

BetaSampler::BetaSampler(const SuePosterior& post, const truncsample::Config& tcfg,
                         std::uint64_t gate_seed)
    : mu_(post.mu_post), kernel_(post.kernel), nu_(post.nu) {
  const int p = static_cast<int>(mu_.size());
  const int q = static_cast<int>(post.sigma_star.rows());
  latent_dim_ = q;

  const Matrix b = post.dstar * post.omega_post * post.dstar.transpose() +
                   post.sigma_star;
  const Vector s = b.diagonal().cwiseSqrt();
  Eigen::LLT<Matrix> llt(b);
  Matrix binv;
  if (llt.info() == Eigen::Success) {
    binv = llt.solve(Matrix::Identity(q, q));
  } else {
    const Matrix l = jittered_cholesky(b);
    binv = l.transpose()
               .triangularView<Eigen::Upper>()
               .solve(l.triangularView<Eigen::Lower>().solve(
                   Matrix::Identity(q, q)));
  }

  const Matrix om_dt = post.omega_post * post.dstar.transpose();  // p x q
  Matrix v0 = post.omega_post - om_dt * binv * om_dt.transpose();
  root0_ = symmetric_sqrt(0.5 * (v0 + v0.transpose()));
  combine_ = om_dt * binv * s.asDiagonal();
  quad_ = s.asDiagonal() * binv * s.asDiagonal();

  truncsample::TruncationProblem tp;
  tp.scale = s.cwiseInverse().asDiagonal() * b * s.cwiseInverse().asDiagonal();
  tp.lower = -s.cwiseInverse().cwiseProduct(post.dstar * mu_);
  if (kernel_ == Kernel::student) tp.df = nu_;
  tmv_ = std::make_unique<truncsample::TmvSampler>(std::move(tp), tcfg, gate_seed);
  (void)p;
}

BetaSample BetaSampler::draw(std::size_t count, std::uint64_t seed) const {
  const int p = static_cast<int>(mu_.size());
  BetaSample out;
  const truncsample::Sample latent = tmv_->draw(count, mix_seed(seed, kTagBeta1));
  out.trunc = latent.diagnostics;
  out.draws.resize(count, p);

  const CounterRng base(mix_seed(seed, kTagBeta0), 0);
  for (std::size_t i = 0; i < count; ++i) {
    CounterRng rng = base.substream(i);
    Vector z(p);
    for (int j = 0; j < p; ++j) z[j] = normal_draw(rng);
    const Vector u1 = latent.draws.row(i).transpose();
    if (kernel_ == Kernel::normal) {
      out.draws.row(i) = (mu_ + root0_ * z + combine_ * u1).transpose();
    } else {
      const double nu_post = nu_ + latent_dim_;
      const double w = chisq_draw(rng, nu_post);
      const Vector u0 = (root0_ * z) / std::sqrt(w / nu_post);
      const double kappa = std::sqrt((nu_ + u1.dot(quad_ * u1)) / nu_post);
      out.draws.row(i) = (mu_ + kappa * u0 + combine_ * u1).transpose();
    }
  }
  return out;
}

BetaSample sample_beta_sun(const SuePosterior& post, std::size_t count,
                           std::uint64_t seed) {
  if (post.kernel != Kernel::normal)
    throw ValidationError("sample_beta_sun: normal kernel required");
  BetaSampler sampler(post, truncsample::Config{}, mix_seed(seed, kTagGate));
  return sampler.draw(count, seed);
}

BetaSample sample_beta_sut(const SuePosterior& post, std::size_t count,
                           std::uint64_t seed) {
  if (post.kernel != Kernel::student)
    throw ValidationError("sample_beta_sut: student kernel required");
  BetaSampler sampler(post, truncsample::Config{}, mix_seed(seed, kTagGate));
  return sampler.draw(count, seed);
}

}  // namespace skewlink::linkmodel
