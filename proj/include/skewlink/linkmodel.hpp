#pragma once

#include "skewlink/common.hpp"
#include "skewlink/mvprob.hpp"
#include "skewlink/skewdist.hpp"
#include "skewlink/truncsample.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace skewlink::linkmodel {

// Binary panel (n x M of 0/1) with its stacked design matrix (nM x p,
// row index i*M + j for observation i, variable j).
struct ModelData {
  IntMatrix panel;
  Matrix design;

  int n() const { return static_cast<int>(panel.rows()); }
  int m() const { return static_cast<int>(panel.cols()); }
  int p() const { return static_cast<int>(design.cols()); }
};

void validate(const ModelData& data);

// D = diag(2y-1) stored as a sign vector, and D_* = (0_p, (DX)')'.
struct SignStructure {
  Vector d;      // nM entries in {-1, +1}
  Matrix dstar;  // (nM+1) x p, first row zero
};

struct BorderedScale {
  Matrix sigma_star;      // (nM+1) x (nM+1)
  Vector sigma_star_sd;   // sqrt of its diagonal
  Matrix sigma_star_bar;  // correlation form
};

struct PriorSpec {
  Vector mu;            // coefficient prior location
  Matrix omega;         // coefficient prior covariance
  double alpha_var = 16.0;  // skewness prior variance
  double eta = 1.0;         // LKJ shape; 1 = jointly uniform
};

// The five posterior parameters of the unified skew-elliptical law for the
// coefficients, plus the pieces the stochastic representation needs.
struct SuePosterior {
  Vector mu_post;
  Matrix omega_post;
  Matrix lambda_post;  // (nM+1) x p
  Vector tau_post;     // nM+1
  Matrix gamma_post;   // (nM+1) x (nM+1) correlation
  Kernel kernel = Kernel::normal;
  double nu = 0.0;
  Vector omega_sd;     // diag(Omega)^{1/2}
  Matrix dstar;
  Matrix sigma_star;
};

SignStructure build_sign_structure(const ModelData& data);

// Replicates the per-variable skewness across observations.
Vector replicate_alpha(const Vector& alpha_s, int n);

// Lemma-1 bordered scale matrix; alpha_full has length nM and delta is
// computed against I_n (x) corr(Sigma).
BorderedScale build_bordered_scale(const Matrix& sigma, const Vector& alpha_full,
                                   int n, const Vector& d_signs);

mvprob::ProbEstimate likelihood_sn(const ModelData& data, const Vector& beta,
                                   const Matrix& sigma, const Vector& alpha_s,
                                   const mvprob::QmcConfig& config,
                                   std::uint64_t seed);

// Depends on the coefficient prior through q(beta); a model feature, not a
// Bayesian leak.
mvprob::ProbEstimate likelihood_st(const ModelData& data, const Vector& beta,
                                   const Matrix& sigma, const Vector& alpha_s,
                                   double nu, const Vector& prior_mu,
                                   const Matrix& prior_omega,
                                   const mvprob::QmcConfig& config,
                                   std::uint64_t seed);

// Simulates the latent-threshold model and tabulates outcome frequencies
// over all 2^{nM} outcomes (bit i*M+j set when y_ij = 1). The independent
// oracle for both likelihoods; for the student kernel the errors are drawn
// from their conditional law given beta.
std::vector<double> generative_oracle(const Vector& beta, const Matrix& sigma,
                                      const Vector& alpha_s, Kernel kernel,
                                      double nu, const Vector& prior_mu,
                                      const Matrix& prior_omega,
                                      const Matrix& design, int n, int m,
                                      std::size_t count, std::uint64_t seed,
                                      bool parallel = true);

SuePosterior posterior_params(const ModelData& data, const PriorSpec& prior,
                              const Matrix& sigma, const Vector& alpha_s,
                              Kernel kernel, double nu);

struct BetaSample {
  Matrix draws;  // count x p
  truncsample::Diagnostics trunc;
};

// Precomputed exact posterior sampler (SUN/SUT stochastic representation).
class BetaSampler {
 public:
  BetaSampler(const SuePosterior& post, const truncsample::Config& tcfg,
              std::uint64_t gate_seed);
  BetaSample draw(std::size_t count, std::uint64_t seed) const;

 private:
  Vector mu_;
  Matrix root0_;     // sqrt of Omega - Omega D*' B^-1 D* Omega
  Matrix combine_;   // Omega D*' B^-1 s
  Matrix quad_;      // s B^-1 s (SUT mixing weight)
  Kernel kernel_;
  double nu_ = 0.0;
  int latent_dim_ = 0;
  std::unique_ptr<truncsample::TmvSampler> tmv_;
};

BetaSample sample_beta_sun(const SuePosterior& post, std::size_t count,
                           std::uint64_t seed);
BetaSample sample_beta_sut(const SuePosterior& post, std::size_t count,
                           std::uint64_t seed);

}  // namespace skewlink::linkmodel
