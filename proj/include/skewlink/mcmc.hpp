#pragma once

#include "skewlink/common.hpp"
#include "skewlink/linkmodel.hpp"
#include "skewlink/mvprob.hpp"
#include "skewlink/rng.hpp"

#include <cstdint>
#include <functional>

namespace skewlink::mcmc {

// Unconstrained correlation parametrization: theta holds the strict lower
// triangle of a unit-diagonal L, ordered (2,1),(3,1),(3,2),... and the
// correlation is the row-normalized L L'.
Matrix theta_to_corr(const Vector& theta, int m);
Vector corr_to_theta(const Matrix& sigma_bar);
int theta_size(int m);

// log |d vec(corr) / d theta| = -((M+1)/2) sum_i log(1 + sum_{j<i} l_ij^2).
double log_jacobian(const Vector& theta, int m);

struct ChainConfig {
  int iterations = 10000;
  int burn_in = 3000;
  double h1 = 0.09;  // skewness proposal variance
  double h2 = 0.09;  // theta proposal variance
  std::uint64_t seed = 1;
  Kernel kernel = Kernel::normal;
  double nu = 0.0;
  linkmodel::PriorSpec prior;
  mvprob::QmcConfig accuracy;       // likelihood evaluation effort
  truncsample::Config trunc;        // latent truncated sampler
  bool sample_alpha = true;         // false: fixed at alpha_init
  bool sample_corr = true;          // false: fixed at theta_init
  Vector alpha_init;                // defaults to zero
  Vector theta_init;                // defaults to zero
  // Testing hook: replaces the log-likelihood used by the MH block.
  std::function<double(const Vector& beta, const Matrix& sigma_bar,
                       const Vector& alpha_s, std::uint64_t seed)>
      log_likelihood_override;

  static mvprob::QmcConfig default_accuracy() {
    mvprob::QmcConfig a;
    a.abs_target = 0.0;
    a.rel_target = 1e-2;
    a.shifts = 6;
    a.initial_points = 512;
    a.max_evaluations = 4000;
    return a;
  }
  ChainConfig() { accuracy = default_accuracy(); }
};

struct ChainDraws {
  Matrix beta;       // kept x p
  Matrix sigma_bar;  // kept x M(M-1)/2 lower-triangle entries
  Matrix alpha;      // kept x M (empty when alpha fixed)
  Vector loglik;     // kept log-likelihood values
  long accepted = 0;
  long mh_steps = 0;
  int iterations = 0;
  int burn_in = 0;
  long rejection_draws = 0;  // truncated-sampler tier usage
  long chain_draws = 0;
  long indicator_rejections = 0;  // admissibility gate hits
};

// Log posterior of (theta, alpha_s) given beta up to a constant:
// log-likelihood + Gaussian alpha prior + LKJ term + Jacobian.
double log_target(const Vector& theta, const Vector& alpha_s,
                  const linkmodel::ModelData& data, const Vector& beta,
                  const ChainConfig& config, std::uint64_t seed);

struct MhResult {
  bool accepted = false;
  bool admissible = true;
  double log_target_state = 0.0;  // at the returned state
  double loglik_state = 0.0;
};

// One joint random-walk update of (theta, alpha_s); proposals are drawn
// from rng, the two target evaluations use the given seeds.
MhResult mh_step(Vector& theta, Vector& alpha_s, const linkmodel::ModelData& data,
                 const Vector& beta, const ChainConfig& config, CounterRng& rng,
                 std::uint64_t seed_current, std::uint64_t seed_proposal);

// Same update with the proposal supplied by the caller.
MhResult mh_step_given(Vector& theta, Vector& alpha_s, const Vector& theta_prop,
                       const Vector& alpha_prop, const linkmodel::ModelData& data,
                       const Vector& beta, const ChainConfig& config, double u,
                       std::uint64_t seed_current, std::uint64_t seed_proposal);

ChainDraws run_chain(const linkmodel::ModelData& data, const ChainConfig& config);

struct DicReport {
  double dic = 0.0;
  double p_d = 0.0;
  double d_at_mean = 0.0;
  double d_bar = 0.0;
};

DicReport dic(const ChainDraws& draws, const linkmodel::ModelData& data,
              const ChainConfig& config);

// Entrywise average projected back to the nearest correlation matrix by
// eigenvalue clipping and renormalization.
Matrix project_to_correlation(const Matrix& a, double min_eig = 1e-6);

}  // namespace skewlink::mcmc
